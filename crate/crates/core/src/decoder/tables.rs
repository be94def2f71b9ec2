use crate::design::{RegionDesign, Variant};
use crate::fixed::{llr_max, message_fits, message_levels, SignedGrid};

/// A region design flattened into lookup tables.
#[derive(Debug, Clone)]
pub struct CompiledRegion {
    /// Label of every integer LLR `v` at index `v + llr_max`.
    q_lut: Vec<i8>,
    /// LLR of a stored `(msg, side)` at `rec_base + msg * rec_stride + side`.
    rec: Vec<i16>,
    rec_base: isize,
    rec_stride: isize,
    /// New stored message for `(old msg, t)` at
    /// `store_base + old * store_stride + t` (merged variant only).
    merge_store: Vec<i8>,
    store_base: isize,
    store_stride: isize,
    /// Side label the next iteration derives from a message stored here,
    /// at `msg + next_side_base`.
    next_side: Vec<i8>,
    next_side_base: isize,
    variant: Variant,
    pub design: RegionDesign,
}

impl CompiledRegion {
    #[inline]
    pub fn quantize(&self, value: i16, max: i32) -> i8 {
        self.q_lut[(value as i32 + max) as usize]
    }

    #[inline]
    pub fn quantize_signed(&self, negative: bool, magnitude: i16, max: i32) -> i8 {
        let l = self.q_lut[(magnitude as i32 + max) as usize];
        if negative {
            -l
        } else {
            l
        }
    }

    #[inline]
    pub fn reconstruct(&self, msg: i8, side: i8) -> i16 {
        self.rec[(self.rec_base + msg as isize * self.rec_stride + side as isize) as usize]
    }

    #[inline]
    pub fn next_side(&self, msg: i8) -> i8 {
        self.next_side[(self.next_side_base + msg as isize) as usize]
    }

    #[inline]
    pub fn store(&self, msg: &mut i8, side: &mut i8, t: i8) {
        match self.variant {
            Variant::Conventional => *msg = t,
            Variant::MemoryAssisted => {
                *side = *msg;
                *msg = t;
            }
            Variant::Merged { .. } => {
                *msg = self.merge_store
                    [(self.store_base + *msg as isize * self.store_stride + t as isize) as usize];
            }
        }
    }
}

/// Per-iteration, per-region tables in the form the inner loops use.
#[derive(Debug, Clone)]
pub struct Tables {
    variant: Variant,
    max: i32,
    iterations: Vec<Vec<CompiledRegion>>,
}

impl Tables {
    pub fn new(variant: Variant, llr_width: u32) -> Self {
        Tables {
            variant,
            max: llr_max(llr_width),
            iterations: Vec::new(),
        }
    }

    pub fn from_design(variant: Variant, llr_width: u32, iterations: &[Vec<RegionDesign>]) -> Self {
        let mut t = Self::new(variant, llr_width);
        for (i, regions) in iterations.iter().enumerate() {
            for r in regions {
                t.push_region(i, r.clone());
            }
        }
        t
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn llr_max(&self) -> i32 {
        self.max
    }

    pub fn grid(&self) -> SignedGrid {
        SignedGrid::new(self.max)
    }

    pub fn iterations(&self) -> usize {
        self.iterations.len()
    }

    /// Appends the next region of iteration `i` (a new iteration is opened
    /// when `i` equals the current count).
    pub fn push_region(&mut self, i: usize, design: RegionDesign) {
        if i == self.iterations.len() {
            self.iterations.push(Vec::new());
        }
        assert!(
            i < self.iterations.len(),
            "iterations must be filled in order"
        );
        let r = self.iterations[i].len();
        let q_lut = (-self.max..=self.max)
            .map(|v| design.quantizer.quantize(v) as i8)
            .collect();
        let h = message_levels(design.quantizer.width());
        let (rec, rec_base, rec_stride) = match (self.variant, &design.merge) {
            (Variant::Merged { .. }, Some(m)) => {
                let hu = m.shape().upsilon_half;
                ((-hu..=hu).map(|u| m.phi(u)).collect(), hu as isize, 1)
            }
            (Variant::Merged { .. }, None) => panic!("merged design without merge tables"),
            _ => {
                let rt = &design.reconstruction;
                let ns = 2 * rt.s_half() + 1;
                (
                    rt.entries().to_vec(),
                    (h * ns + rt.s_half()) as isize,
                    ns as isize,
                )
            }
        };
        let (next_side, next_side_base): (Vec<i8>, isize) = match (self.variant, &design.merge) {
            (Variant::Conventional, _) => (vec![0; (2 * h + 1) as usize], h as isize),
            (Variant::MemoryAssisted, _) => ((-h..=h).map(|m| m as i8).collect(), h as isize),
            (Variant::Merged { .. }, Some(m)) => {
                let hu = m.shape().upsilon_half;
                ((-hu..=hu).map(|u| m.psi(u)).collect(), hu as isize)
            }
            (Variant::Merged { .. }, None) => unreachable!(),
        };
        // side labels of the messages the previous iteration left behind
        let (side, side_base): (Vec<i8>, isize) = if i == 0 {
            (vec![0], 0)
        } else {
            let prev = &self.iterations[i - 1][r];
            (prev.next_side.clone(), prev.next_side_base)
        };
        let (merge_store, store_base, store_stride) = match &design.merge {
            Some(m) if self.variant.is_merged() => {
                let shape = m.shape();
                let stride = 2 * h + 1;
                let half_old = side_base as i32;
                let lut = (-half_old..=half_old)
                    .flat_map(|old| {
                        let s = side[(old + half_old) as usize] as i32;
                        (-h..=h).map(move |t| (s, t))
                    })
                    .map(|(s, t)| {
                        debug_assert!(s.abs() <= shape.side_half);
                        m.upsilon(s, t)
                    })
                    .collect();
                (lut, (half_old * stride + h) as isize, stride as isize)
            }
            _ => (Vec::new(), 0, 0),
        };
        self.iterations[i].push(CompiledRegion {
            q_lut,
            rec,
            rec_base,
            rec_stride,
            merge_store,
            store_base,
            store_stride,
            next_side,
            next_side_base,
            variant: self.variant,
            design,
        });
    }

    #[inline]
    pub fn region(&self, i: usize, region: usize) -> &CompiledRegion {
        &self.iterations[i][region]
    }

    /// Quantizes an integer LLR with the quantizer of `(i, region)`.
    #[inline]
    pub fn quantize(&self, i: usize, region: usize, value: i16) -> i8 {
        self.iterations[i][region].quantize(value, self.max)
    }

    /// Quantizes a signed-zero grid value.
    #[inline]
    pub fn quantize_signed(&self, i: usize, region: usize, negative: bool, magnitude: i16) -> i8 {
        self.iterations[i][region].quantize_signed(negative, magnitude, self.max)
    }

    /// LLR of a stored message written in iteration `i`.
    #[inline]
    pub fn reconstruct(&self, i: usize, region: usize, msg: i8, side: i8) -> i16 {
        self.iterations[i][region].reconstruct(msg, side)
    }

    /// Side label that accompanies a new check message written in
    /// iteration `i` over the stored `msg`.
    #[inline]
    pub fn side_symbol(&self, i: usize, region: usize, msg: i8) -> i8 {
        if i == 0 {
            0
        } else {
            self.iterations[i - 1][region].next_side(msg)
        }
    }

    /// Writes check message `t` of iteration `i` into a memory location.
    #[inline]
    pub fn store(&self, i: usize, region: usize, msg: &mut i8, side: &mut i8, t: i8) {
        self.iterations[i][region].store(msg, side, t);
        debug_assert!(
            self.fits(*msg, *side),
            "stored message ({}, {}) exceeds its width",
            *msg,
            *side
        );
    }

    fn fits(&self, msg: i8, side: i8) -> bool {
        let q = self.iterations[0][0].design.quantizer.width();
        match self.variant {
            Variant::Conventional => message_fits(msg as i32, q) && side == 0,
            Variant::MemoryAssisted => message_fits(msg as i32, q) && message_fits(side as i32, q),
            Variant::Merged { upsilon_width, .. } => {
                message_fits(msg as i32, upsilon_width) && side == 0
            }
        }
    }
}
