//! Text serialization of decoder designs.
//!
//! One record per line, `key values...`. Floats use the shortest
//! representation that parses back to the same value, so a design survives
//! a write/read cycle bit for bit.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::channel::ChannelQuantizer;
use crate::fixed::message_levels;
use crate::{Error, Result};

use super::types::{
    DecoderDesign, DesignHeader, MergeShape, MergeTables, ReconstructionTable, RegionDesign,
    ThresholdQuantizer,
};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "maqd-design";

fn join<T: ToString>(values: &[T]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Serializes a (possibly partial) design.
pub fn write_design(d: &DecoderDesign) -> String {
    let h = &d.header;
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "{MAGIC} {FORMAT_VERSION}");
    let _ = writeln!(w, "code_hash {}", h.code_hash);
    let _ = writeln!(w, "z {}", h.z);
    let _ = writeln!(w, "rate {}", h.rate);
    let _ = writeln!(w, "schedule {}", h.schedule);
    let _ = writeln!(w, "variant {}", h.variant);
    let _ = writeln!(w, "alignment {}", h.alignment);
    let _ = writeln!(w, "msg_width {}", h.msg_width);
    let _ = writeln!(w, "channel_width {}", h.channel_width);
    let _ = writeln!(w, "llr_width {}", h.llr_width);
    let _ = writeln!(w, "max_iter {}", h.max_iter);
    let _ = writeln!(w, "design_ebn0 {}", h.design_ebn0);
    let _ = writeln!(w, "seed {}", h.seed);
    let _ = writeln!(w, "llr_scale {}", d.channel.scale());
    let _ = writeln!(w, "channel_thresholds {}", join(d.channel.thresholds()));
    let _ = writeln!(
        w,
        "channel_reconstruction {}",
        join(d.channel.reconstruction())
    );
    let _ = writeln!(w, "iterations {}", d.iterations.len());
    for (i, regions) in d.iterations.iter().enumerate() {
        for (r, rd) in regions.iter().enumerate() {
            let _ = writeln!(w, "region {i} {r}");
            let _ = writeln!(w, "used {}", rd.used as u8);
            let _ = writeln!(w, "preserved {}", rd.preserved);
            let _ = writeln!(w, "thresholds {}", join(rd.quantizer.thresholds()));
            let rec = &rd.reconstruction;
            let _ = writeln!(w, "side_half {}", rec.s_half());
            for t in (-rec.t_half()..=rec.t_half()).filter(|&t| t != 0) {
                for s in -rec.s_half()..=rec.s_half() {
                    let _ = writeln!(w, "rec {t} {s} {}", rec.get(t, s));
                }
            }
            if let Some(m) = &rd.merge {
                let shape = m.shape();
                let _ = writeln!(
                    w,
                    "merge {} {} {}",
                    shape.side_half, shape.upsilon_half, shape.psi_half
                );
                for s in -shape.side_half..=shape.side_half {
                    for t in (-shape.msg_half..=shape.msg_half).filter(|&t| t != 0) {
                        let _ = writeln!(w, "upsilon {s} {t} {}", m.upsilon(s, t));
                    }
                }
                for u in (-shape.upsilon_half..=shape.upsilon_half).filter(|&u| u != 0) {
                    let _ = writeln!(w, "psi {u} {}", m.psi(u));
                }
                for u in (-shape.upsilon_half..=shape.upsilon_half).filter(|&u| u != 0) {
                    let _ = writeln!(w, "phi {u} {}", m.phi(u));
                }
            }
            let _ = writeln!(w, "end");
        }
    }
    out
}

/// Line cursor over a design file.
struct Lines<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            lines: text.lines().enumerate().peekable(),
            line: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Format {
            line: self.line,
            msg: msg.into(),
        }
    }

    /// Next non-empty line split into key and fields.
    fn next(&mut self) -> Result<(&'a str, Vec<&'a str>)> {
        loop {
            let Some((n, l)) = self.lines.next() else {
                return Err(self.err("unexpected end of file"));
            };
            self.line = n + 1;
            let mut parts = l.split_whitespace();
            if let Some(key) = parts.next() {
                return Ok((key, parts.collect()));
            }
        }
    }

    fn peek_key(&mut self) -> Option<&'a str> {
        while let Some((_, l)) = self.lines.peek() {
            match l.split_whitespace().next() {
                Some(k) => return Some(k),
                None => {
                    self.lines.next();
                }
            }
        }
        None
    }

    fn expect(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let (k, fields) = self.next()?;
        if k != key {
            return Err(self.err(format!("expected '{key}', found '{k}'")));
        }
        Ok(fields)
    }

    fn value<T: FromStr>(&self, field: &str) -> Result<T> {
        field
            .parse()
            .map_err(|_| self.err(format!("invalid value '{field}'")))
    }

    fn single<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let fields = self.expect(key)?;
        if fields.len() != 1 {
            return Err(self.err(format!("'{key}' takes one value")));
        }
        self.value(fields[0])
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Result<Vec<T>> {
        let fields = self.expect(key)?;
        fields.iter().map(|f| self.value(f)).collect()
    }

    fn fixed<T: FromStr, const N: usize>(&mut self, key: &str) -> Result<[T; N]> {
        let values: Vec<T> = self.list(key)?;
        let n = values.len();
        values
            .try_into()
            .map_err(|_| self.err(format!("'{key}' takes {N} values, got {n}")))
    }

    /// Wraps table validation errors with the current line.
    fn check<T>(&self, r: Result<T>) -> Result<T> {
        r.map_err(|e| self.err(e.to_string()))
    }
}

/// Parses a design written by [`write_design`].
pub fn read_design(text: &str) -> Result<DecoderDesign> {
    let mut l = Lines::new(text);
    let (magic, fields) = l.next()?;
    if magic != MAGIC || fields.len() != 1 {
        return Err(l.err("not a design file"));
    }
    let version: u32 = l.value(fields[0])?;
    if version != FORMAT_VERSION {
        return Err(l.err(format!("unsupported format version {version}")));
    }
    let code_hash: String = l.single("code_hash")?;
    let header = DesignHeader {
        code_hash,
        z: l.single("z")?,
        rate: l.single("rate")?,
        schedule: l.single("schedule")?,
        variant: l.single("variant")?,
        alignment: l.single("alignment")?,
        msg_width: l.single("msg_width")?,
        channel_width: l.single("channel_width")?,
        llr_width: l.single("llr_width")?,
        max_iter: l.single("max_iter")?,
        design_ebn0: l.single("design_ebn0")?,
        seed: l.single("seed")?,
    };
    let scale: f64 = l.single("llr_scale")?;
    let thresholds: Vec<f64> = l.list("channel_thresholds")?;
    let reconstruction: Vec<i16> = l.list("channel_reconstruction")?;
    let channel = l.check(ChannelQuantizer::from_parts(
        header.channel_width,
        thresholds,
        reconstruction,
        scale,
    ))?;
    let count: usize = l.single("iterations")?;
    let h = message_levels(header.msg_width);
    let mut iterations: Vec<Vec<RegionDesign>> = vec![Vec::new(); count];
    while l.peek_key().is_some() {
        let [i, r]: [usize; 2] = l.fixed("region")?;
        if i >= count || r != iterations[i].len() || (i > 0 && iterations[i - 1].is_empty()) {
            return Err(l.err(format!("region {i} {r} out of order")));
        }
        let used: u8 = l.single("used")?;
        let preserved: f64 = l.single("preserved")?;
        let thresholds: Vec<i32> = l.list("thresholds")?;
        let quantizer = l.check(ThresholdQuantizer::new(header.msg_width, thresholds))?;
        let s_half: i32 = l.single("side_half")?;
        if !(0..=64).contains(&s_half) {
            return Err(l.err(format!("side range {s_half} out of bounds")));
        }
        let ns = (2 * s_half + 1) as usize;
        let mut entries = vec![0i16; (2 * h + 1) as usize * ns];
        let mut seen = vec![false; entries.len()];
        while l.peek_key() == Some("rec") {
            let [t, s, v]: [i32; 3] = l.fixed("rec")?;
            if t == 0 || t.abs() > h || s.abs() > s_half {
                return Err(l.err(format!("rec entry ({t}, {s}) out of range")));
            }
            let k = (t + h) as usize * ns + (s + s_half) as usize;
            if std::mem::replace(&mut seen[k], true) {
                return Err(l.err(format!("duplicate rec entry ({t}, {s})")));
            }
            entries[k] = v as i16;
        }
        if seen.iter().filter(|&&s| s).count() != 2 * h as usize * ns {
            return Err(l.err("incomplete reconstruction table"));
        }
        let reconstruction = l.check(ReconstructionTable::new(
            h,
            s_half,
            entries,
            header.llr_width,
        ))?;
        let merge = if l.peek_key() == Some("merge") {
            Some(read_merge(&mut l, h, header.llr_width)?)
        } else {
            None
        };
        l.expect("end")?;
        iterations[i].push(RegionDesign {
            used: used != 0,
            quantizer,
            reconstruction,
            merge,
            preserved,
        });
    }
    if let Some(pos) = iterations.iter().position(|it| it.is_empty()) {
        return Err(l.err(format!("iteration {pos} has no regions")));
    }
    Ok(DecoderDesign {
        header,
        channel,
        iterations,
    })
}

fn read_merge(l: &mut Lines, h: i32, llr_width: u32) -> Result<MergeTables> {
    let [side_half, upsilon_half, psi_half]: [i32; 3] = l.fixed("merge")?;
    if !(0..=64).contains(&side_half)
        || !(1..=64).contains(&upsilon_half)
        || !(1..=64).contains(&psi_half)
    {
        return Err(l.err("merge ranges out of bounds"));
    }
    let shape = MergeShape {
        msg_half: h,
        side_half,
        upsilon_half,
        psi_half,
    };
    let nt = (2 * h + 1) as usize;
    let nu = (2 * upsilon_half + 1) as usize;
    let mut upsilon = vec![0i8; nt * (2 * side_half + 1) as usize];
    let mut psi = vec![0i8; nu];
    let mut phi = vec![0i16; nu];
    for s in -side_half..=side_half {
        for t in (-h..=h).filter(|&t| t != 0) {
            let [fs, ft, u]: [i32; 3] = l.fixed("upsilon")?;
            if (fs, ft) != (s, t) {
                return Err(l.err(format!("expected upsilon entry ({s}, {t})")));
            }
            upsilon[(s + side_half) as usize * nt + (t + h) as usize] = u as i8;
        }
    }
    for key in ["psi", "phi"] {
        for u in (-upsilon_half..=upsilon_half).filter(|&u| u != 0) {
            let [fu, v]: [i32; 2] = l.fixed(key)?;
            if fu != u {
                return Err(l.err(format!("expected {key} entry {u}")));
            }
            let k = (u + upsilon_half) as usize;
            if key == "psi" {
                psi[k] = v as i8;
            } else {
                phi[k] = v as i16;
            }
        }
    }
    l.check(MergeTables::new(shape, upsilon, psi, phi, llr_width))
}

impl DecoderDesign {
    pub fn to_text(&self) -> String {
        write_design(self)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        read_design(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::Rate;
    use crate::design::{Alignment, Schedule, Variant};

    fn sample(variant: Variant) -> DecoderDesign {
        let header = DesignHeader {
            code_hash: "ab".repeat(32),
            z: 8,
            rate: Rate::new(1, 3),
            schedule: Schedule::Flooding,
            variant,
            alignment: Alignment::Row,
            msg_width: 2,
            channel_width: 3,
            llr_width: 8,
            max_iter: 2,
            design_ebn0: 1.0 / 3.0,
            seed: 7,
        };
        let channel = ChannelQuantizer::from_parts(
            3,
            vec![0.1 + 0.2, 2.5, 7.125],
            vec![5, 30, 77, 127],
            127.0 / 11.3,
        )
        .unwrap();
        let region = |s_half: i32, merge_side: i32| {
            let ns = (2 * s_half + 1) as usize;
            let mut entries = vec![0i16; 5 * ns];
            for t in 1..=2 {
                for s in -s_half..=s_half {
                    let v = (t * 20 + s * 3) as i16;
                    entries[((t + 2) as usize) * ns + (s + s_half) as usize] = v;
                    entries[((2 - t) as usize) * ns + (s_half - s) as usize] = -v;
                }
            }
            let merge = variant.is_merged().then(|| {
                let shape = MergeShape {
                    msg_half: 2,
                    side_half: merge_side,
                    upsilon_half: 4,
                    psi_half: 2,
                };
                let upsilon = (-merge_side..=merge_side)
                    .flat_map(|s| {
                        (-2..=2).map(move |t: i32| (2 * t - t.signum() * (s * t < 0) as i32) as i8)
                    })
                    .collect();
                let psi = (-4..=4)
                    .map(|u: i32| (u.signum() * ((u.abs() + 1) / 2)) as i8)
                    .collect();
                let phi = (-4..=4).map(|u: i32| (u * 11) as i16).collect();
                MergeTables::new(shape, upsilon, psi, phi, 8).unwrap()
            });
            RegionDesign {
                used: s_half == 0,
                quantizer: ThresholdQuantizer::new(2, vec![13]).unwrap(),
                reconstruction: ReconstructionTable::new(2, s_half, entries, 8).unwrap(),
                merge,
                preserved: 0.1 + 0.7,
            }
        };
        DecoderDesign {
            header,
            channel,
            iterations: vec![
                vec![region(0, 0), region(0, 0)],
                vec![region(2, 2), region(2, 2)],
            ],
        }
    }

    #[test]
    fn round_trip_is_exact() {
        for variant in [
            Variant::Conventional,
            Variant::MemoryAssisted,
            Variant::Merged {
                upsilon_width: 3,
                psi_width: 2,
            },
        ] {
            let d = sample(variant);
            let text = write_design(&d);
            let back = read_design(&text).unwrap();
            assert_eq!(back, d);
            assert_eq!(write_design(&back), text);
        }
    }

    #[test]
    fn floats_survive_exactly() {
        let d = sample(Variant::Conventional);
        let back = read_design(&write_design(&d)).unwrap();
        assert_eq!(back.header.design_ebn0.to_bits(), (1.0f64 / 3.0).to_bits());
        assert_eq!(
            back.channel.thresholds()[0].to_bits(),
            (0.1f64 + 0.2).to_bits()
        );
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = write_design(&sample(Variant::Conventional));
        let broken = text.replacen("rec 1 0 20", "rec 1 0 21", 1);
        match read_design(&broken) {
            Err(Error::Format { line, .. }) => assert!(line > 10),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            read_design("hello 1\n"),
            Err(Error::Format { line: 1, .. })
        ));
        let truncated: String = text.lines().take(30).collect::<Vec<_>>().join("\n");
        assert!(read_design(&truncated).is_err());
    }

    #[test]
    fn partial_designs_round_trip() {
        let mut d = sample(Variant::MemoryAssisted);
        d.iterations.truncate(1);
        assert_eq!(read_design(&write_design(&d)).unwrap(), d);
    }
}
