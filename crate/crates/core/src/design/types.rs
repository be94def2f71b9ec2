use std::fmt;
use std::str::FromStr;

use crate::channel::ChannelQuantizer;
use crate::code::{LiftedCode, Rate};
use crate::fixed::{llr_max, message_levels};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Schedule {
    Flooding,
    Layered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Alignment {
    Row,
    Matrix,
}

/// What a memory location keeps between iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Only the latest check message.
    Conventional,
    /// Latest check message plus the previous one as side information.
    MemoryAssisted,
    /// One merged label `t^Y = Y(s^P, t^c)` of `upsilon_width` bits; the side
    /// information is `s^P = P(t^Y)` of `psi_width` bits.
    Merged { upsilon_width: u32, psi_width: u32 },
}

macro_rules! keyword_enum {
    ($ty:ident { $($variant:ident => $text:literal),+ }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($ty::$variant => $text),+ })
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($text => Ok($ty::$variant),)+
                    other => Err(Error::Config(format!(
                        concat!("unknown ", stringify!($ty), " '{}'"), other
                    ))),
                }
            }
        }
    };
}

keyword_enum!(Schedule { Flooding => "flooding", Layered => "layered" });
keyword_enum!(Alignment { Row => "row", Matrix => "matrix" });

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Conventional => f.write_str("conventional"),
            Variant::MemoryAssisted => f.write_str("memory"),
            Variant::Merged {
                upsilon_width,
                psi_width,
            } => write!(f, "merged-{upsilon_width}-{psi_width}"),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    /// `conventional`, `memory` or `merged-<w_upsilon>-<w_psi>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "conventional" => return Ok(Variant::Conventional),
            "memory" => return Ok(Variant::MemoryAssisted),
            _ => {}
        }
        let bad = || Error::Config(format!("unknown variant '{s}'"));
        let rest = s.strip_prefix("merged-").ok_or_else(bad)?;
        let (a, b) = rest.split_once('-').ok_or_else(bad)?;
        Ok(Variant::Merged {
            upsilon_width: a.parse().map_err(|_| bad())?,
            psi_width: b.parse().map_err(|_| bad())?,
        })
    }
}

impl Variant {
    /// Width of the side labels, `None` without side information.
    pub fn side_width(&self, msg_width: u32) -> Option<u32> {
        match *self {
            Variant::Conventional => None,
            Variant::MemoryAssisted => Some(msg_width),
            Variant::Merged { psi_width, .. } => Some(psi_width),
        }
    }

    pub fn is_merged(&self) -> bool {
        matches!(self, Variant::Merged { .. })
    }
}

/// Magnitude thresholds on the integer LLR grid.
///
/// `level(m) = 1 + #{j : thresholds[j] <= m}` and a value `v` maps to
/// `sign(v) * level(|v|)` with zero counted as positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdQuantizer {
    width: u32,
    thresholds: Vec<i32>,
}

impl ThresholdQuantizer {
    pub fn new(width: u32, thresholds: Vec<i32>) -> Result<Self> {
        let half = message_levels(width) as usize;
        if thresholds.len() != half - 1 {
            return Err(Error::Length {
                expected: half - 1,
                got: thresholds.len(),
            });
        }
        if thresholds.iter().any(|&t| t < 0) || thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(format!(
                "thresholds {thresholds:?} must be nonnegative and strictly increasing"
            )));
        }
        Ok(ThresholdQuantizer { width, thresholds })
    }

    /// Evenly spread thresholds, used for regions that never see a message.
    pub fn placeholder(width: u32) -> Self {
        let half = message_levels(width);
        ThresholdQuantizer {
            width,
            thresholds: (1..half).collect(),
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn thresholds(&self) -> &[i32] {
        &self.thresholds
    }

    #[inline]
    pub fn level(&self, magnitude: i32) -> i32 {
        1 + self.thresholds.partition_point(|&t| t <= magnitude) as i32
    }

    #[inline]
    pub fn quantize_signed(&self, negative: bool, magnitude: i32) -> i32 {
        let l = self.level(magnitude);
        if negative {
            -l
        } else {
            l
        }
    }

    #[inline]
    pub fn quantize(&self, value: i32) -> i32 {
        self.quantize_signed(value < 0, value.abs())
    }
}

/// Dense table over `t in [-t_half, t_half]` and `s in [-s_half, s_half]`.
///
/// Index `t = 0` is the empty message and always yields zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconstructionTable {
    t_half: i32,
    s_half: i32,
    entries: Vec<i16>,
}

impl ReconstructionTable {
    /// `entries[(t + t_half) * (2 s_half + 1) + s + s_half]`.
    pub fn new(t_half: i32, s_half: i32, entries: Vec<i16>, llr_width: u32) -> Result<Self> {
        let ns = (2 * s_half + 1) as usize;
        let expected = (2 * t_half + 1) as usize * ns;
        if entries.len() != expected {
            return Err(Error::Length {
                expected,
                got: entries.len(),
            });
        }
        let table = ReconstructionTable {
            t_half,
            s_half,
            entries,
        };
        let max = llr_max(llr_width) as i16;
        for s in -s_half..=s_half {
            if table.get(0, s) != 0 {
                return Err(Error::Validation(
                    "empty message must reconstruct to 0".into(),
                ));
            }
            for t in -t_half..=t_half {
                let v = table.get(t, s);
                if v.abs() > max {
                    return Err(Error::Validation(format!(
                        "reconstruction {v} exceeds {max}"
                    )));
                }
                if table.get(-t, -s) != -v {
                    return Err(Error::Validation(format!(
                        "reconstruction not odd at t={t}, s={s}"
                    )));
                }
            }
        }
        Ok(table)
    }

    pub fn zeros(t_half: i32, s_half: i32) -> Self {
        ReconstructionTable {
            t_half,
            s_half,
            entries: vec![0; ((2 * t_half + 1) * (2 * s_half + 1)) as usize],
        }
    }

    pub fn t_half(&self) -> i32 {
        self.t_half
    }

    /// Largest side label; `0` for a table without side information.
    pub fn s_half(&self) -> i32 {
        self.s_half
    }

    pub fn entries(&self) -> &[i16] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, t: i32, s: i32) -> i16 {
        let ns = 2 * self.s_half + 1;
        self.entries[((t + self.t_half) * ns + s + self.s_half) as usize]
    }
}

/// Merge tables `Y(s^P, t^c) -> t^Y`, `P(t^Y) -> s^P` and `phi(t^Y)`.
///
/// `side_half` bounds the `s^P` accepted by `Y` (zero in the first
/// iteration, where no side label exists yet); `psi_half` bounds the labels
/// `P` produces for the next iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeTables {
    msg_half: i32,
    side_half: i32,
    upsilon_half: i32,
    psi_half: i32,
    upsilon: Vec<i8>,
    psi: Vec<i8>,
    phi: Vec<i16>,
}

/// Label bounds of a [`MergeTables`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergeShape {
    pub msg_half: i32,
    pub side_half: i32,
    pub upsilon_half: i32,
    pub psi_half: i32,
}

impl MergeTables {
    /// `upsilon[(s + side_half) * (2 msg_half + 1) + t + msg_half]`,
    /// `psi[u + upsilon_half]`, `phi[u + upsilon_half]`; label 0 maps to 0
    /// everywhere.
    pub fn new(
        shape: MergeShape,
        upsilon: Vec<i8>,
        psi: Vec<i8>,
        phi: Vec<i16>,
        llr_width: u32,
    ) -> Result<Self> {
        let MergeShape {
            msg_half,
            side_half,
            upsilon_half,
            psi_half,
        } = shape;
        let nt = 2 * msg_half + 1;
        let nu = (2 * upsilon_half + 1) as usize;
        let expected = (nt * (2 * side_half + 1)) as usize;
        if upsilon.len() != expected {
            return Err(Error::Length {
                expected,
                got: upsilon.len(),
            });
        }
        for table in [psi.len(), phi.len()] {
            if table != nu {
                return Err(Error::Length {
                    expected: nu,
                    got: table,
                });
            }
        }
        if psi_half > upsilon_half || side_half > psi_half {
            return Err(Error::Validation(
                "merge label ranges must satisfy side <= psi <= upsilon".into(),
            ));
        }
        let m = MergeTables {
            msg_half,
            side_half,
            upsilon_half,
            psi_half,
            upsilon,
            psi,
            phi,
        };
        let max = llr_max(llr_width) as i16;
        for s in -side_half..=side_half {
            for t in -msg_half..=msg_half {
                let u = m.upsilon(s, t) as i32;
                let ok = if t == 0 {
                    u == 0
                } else {
                    u != 0 && u.abs() <= upsilon_half
                };
                if !ok || m.upsilon(-s, -t) as i32 != -u {
                    return Err(Error::Validation(format!(
                        "invalid upsilon entry at s={s}, t={t}"
                    )));
                }
            }
        }
        for u in -upsilon_half..=upsilon_half {
            let s = m.psi(u) as i32;
            let ok = if u == 0 {
                s == 0
            } else {
                s != 0 && s.abs() <= psi_half
            };
            if !ok || m.psi(-u) as i32 != -s {
                return Err(Error::Validation(format!("invalid psi entry at {u}")));
            }
            let v = m.phi(u);
            if v.abs() > max || m.phi(-u) != -v || (u == 0 && v != 0) {
                return Err(Error::Validation(format!("invalid phi entry at {u}")));
            }
        }
        Ok(m)
    }

    pub fn shape(&self) -> MergeShape {
        MergeShape {
            msg_half: self.msg_half,
            side_half: self.side_half,
            upsilon_half: self.upsilon_half,
            psi_half: self.psi_half,
        }
    }

    #[inline]
    pub fn upsilon(&self, s: i32, t: i32) -> i8 {
        self.upsilon[((s + self.side_half) * (2 * self.msg_half + 1) + t + self.msg_half) as usize]
    }

    #[inline]
    pub fn psi(&self, u: i32) -> i8 {
        self.psi[(u + self.upsilon_half) as usize]
    }

    #[inline]
    pub fn phi(&self, u: i32) -> i16 {
        self.phi[(u + self.upsilon_half) as usize]
    }
}

/// Everything designed for one region in one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionDesign {
    /// False for regions whose locations were all deferred; their tables
    /// are placeholders that never touch a message.
    pub used: bool,
    pub quantizer: ThresholdQuantizer,
    pub reconstruction: ReconstructionTable,
    pub merge: Option<MergeTables>,
    /// `I(X; T | S)` preserved by the quantizer on the training data.
    pub preserved: f64,
}

/// Identity and parameters of a design.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignHeader {
    /// Hash of the rate-adapted base graph.
    pub code_hash: String,
    pub z: usize,
    pub rate: Rate,
    pub schedule: Schedule,
    pub variant: Variant,
    pub alignment: Alignment,
    pub msg_width: u32,
    pub channel_width: u32,
    pub llr_width: u32,
    pub max_iter: usize,
    pub design_ebn0: f64,
    pub seed: u64,
}

/// A complete decoder design.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderDesign {
    pub header: DesignHeader,
    pub channel: ChannelQuantizer,
    /// `iterations[i][region]`.
    pub iterations: Vec<Vec<RegionDesign>>,
}

/// Number of regions for a code and alignment.
pub fn region_count(code: &LiftedCode, alignment: Alignment) -> usize {
    match alignment {
        Alignment::Row => code.base().rows(),
        Alignment::Matrix => 1,
    }
}

/// Region of every base edge.
pub fn edge_regions(code: &LiftedCode, alignment: Alignment) -> Vec<usize> {
    code.edges()
        .iter()
        .map(|e| match alignment {
            Alignment::Row => e.row,
            Alignment::Matrix => 0,
        })
        .collect()
}

/// Supported combinations of widths, schedule and alignment.
pub fn validate_parameters(header: &DesignHeader) -> Result<()> {
    if !(2..=4).contains(&header.msg_width) {
        return Err(Error::Config(format!(
            "message width {} unsupported (2, 3 or 4)",
            header.msg_width
        )));
    }
    if !(1..=8).contains(&header.channel_width) {
        return Err(Error::Config(format!(
            "channel width {} unsupported",
            header.channel_width
        )));
    }
    if !(4..=12).contains(&header.llr_width) {
        return Err(Error::Config(format!(
            "LLR width {} unsupported",
            header.llr_width
        )));
    }
    if header.llr_width <= header.msg_width {
        return Err(Error::Config(
            "LLR width must exceed the message width".into(),
        ));
    }
    if header.schedule == Schedule::Layered && header.alignment == Alignment::Matrix {
        return Err(Error::Config(
            "layered schedule requires row alignment: one matrix-wide design cannot depend on \
             layers that have not been designed yet"
                .into(),
        ));
    }
    if let Variant::Merged {
        upsilon_width,
        psi_width,
    } = header.variant
    {
        if psi_width < 1 || psi_width > upsilon_width || upsilon_width > 7 {
            return Err(Error::Config(format!(
                "merge widths ({upsilon_width}, {psi_width}) need 1 <= w_psi <= w_upsilon <= 7"
            )));
        }
        if (1u32 << psi_width) * (1u32 << header.msg_width) < (1u32 << upsilon_width) {
            return Err(Error::Config(format!(
                "merge width {upsilon_width} exceeds the {} + {} bits it merges",
                header.msg_width, psi_width
            )));
        }
    }
    Ok(())
}
