use std::fmt;
use std::path::Path;
use std::str::FromStr;

use log::warn;
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// Marker for "no edge" in a base matrix.
pub const NO_EDGE: i32 = -1;

/// Protograph matrix of a quasi-cyclic LDPC code.
///
/// Entries are cyclic shift values or [`NO_EDGE`]. Shifts are stored as they
/// appear in the asset (already reduced modulo `z_max`); lifting with a
/// smaller factor reduces them again modulo that factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseGraph {
    rows: usize,
    cols: usize,
    info_cols: usize,
    z_max: usize,
    entries: Vec<i32>,
    punctured: Vec<usize>,
}

/// A code rate given as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rate {
    pub num: u32,
    pub den: u32,
}

impl Rate {
    pub fn new(num: u32, den: u32) -> Self {
        assert!(num > 0 && den > 0);
        Rate { num, den }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Rate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid rate '{s}', expected e.g. 1/3"));
        let (a, b) = s.trim().split_once('/').ok_or_else(bad)?;
        let num: u32 = a.trim().parse().map_err(|_| bad())?;
        let den: u32 = b.trim().parse().map_err(|_| bad())?;
        if num == 0 || den == 0 || num > den {
            return Err(bad());
        }
        Ok(Rate { num, den })
    }
}

/// Options for [`BaseGraph::parse`].
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Reject shift values equal to `z_max` instead of reducing them.
    pub strict: bool,
}

impl BaseGraph {
    /// Builds and validates a base graph from a row-major shift matrix.
    pub fn new(
        rows: usize,
        cols: usize,
        info_cols: usize,
        z_max: usize,
        entries: Vec<i32>,
        punctured: Vec<usize>,
    ) -> Result<Self> {
        let bg = BaseGraph {
            rows,
            cols,
            info_cols,
            z_max,
            entries,
            punctured,
        };
        bg.validate()?;
        Ok(bg)
    }

    fn validate(&self) -> Result<()> {
        let v = |m: String| Err(Error::Validation(m));
        if self.rows == 0 || self.cols == 0 || self.z_max == 0 {
            return v("base graph dimensions and z_max must be positive".into());
        }
        if self.entries.len() != self.rows * self.cols {
            return v(format!(
                "expected {} entries, got {}",
                self.rows * self.cols,
                self.entries.len()
            ));
        }
        if self.info_cols >= self.cols {
            return v(format!(
                "info_cols {} must be below cols {}",
                self.info_cols, self.cols
            ));
        }
        if self.rows != self.cols - self.info_cols {
            return v(format!(
                "rows {} must equal cols - info_cols = {}",
                self.rows,
                self.cols - self.info_cols
            ));
        }
        for (idx, &e) in self.entries.iter().enumerate() {
            if e < NO_EDGE || e >= self.z_max as i32 {
                return v(format!(
                    "shift {e} at row {}, col {} outside [-1, {}]",
                    idx / self.cols,
                    idx % self.cols,
                    self.z_max - 1
                ));
            }
        }
        let mut seen = vec![false; self.cols];
        for &p in &self.punctured {
            if p >= self.cols || seen[p] {
                return v(format!("invalid or duplicate punctured column {p}"));
            }
            seen[p] = true;
        }
        for r in 0..self.rows {
            if self.row_degree(r) < 2 {
                return v(format!("row {r} has degree below 2"));
            }
        }
        Ok(())
    }

    /// Parses the plain-text asset format.
    ///
    /// ```text
    /// # comment
    /// rows cols info_cols z_max
    /// punctured 0 1          (optional)
    /// <cols shifts>          (rows lines, -1 = no edge)
    /// ```
    pub fn parse(text: &str, opts: LoadOptions) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let parse_err = |line, column, msg: String| Error::Parse { line, column, msg };

        let (hline, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, 1, "empty base graph asset".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .enumerate()
            .map(|(c, tok)| {
                tok.parse()
                    .map_err(|_| parse_err(hline, c + 1, format!("invalid header field '{tok}'")))
            })
            .collect::<Result<_>>()?;
        if dims.len() != 4 {
            return Err(parse_err(
                hline,
                1,
                format!(
                    "header needs 'rows cols info_cols z_max', got {} fields",
                    dims.len()
                ),
            ));
        }
        let (rows, cols, info_cols, z_max) = (dims[0], dims[1], dims[2], dims[3]);

        let mut punctured = Vec::new();
        let mut entries = Vec::with_capacity(rows * cols);
        let mut row = 0;
        for (lno, line) in lines {
            if let Some(rest) = line.strip_prefix("punctured") {
                if row > 0 {
                    return Err(parse_err(
                        lno,
                        1,
                        "punctured must precede matrix rows".into(),
                    ));
                }
                for (c, tok) in rest.split_whitespace().enumerate() {
                    punctured.push(tok.parse().map_err(|_| {
                        parse_err(lno, c + 2, format!("invalid punctured column '{tok}'"))
                    })?);
                }
                continue;
            }
            if row == rows {
                return Err(parse_err(lno, 1, format!("more than {rows} matrix rows")));
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != cols {
                return Err(parse_err(
                    lno,
                    toks.len().min(cols) + 1,
                    format!("row {row} has {} entries, expected {cols}", toks.len()),
                ));
            }
            for (c, tok) in toks.iter().enumerate() {
                let mut shift: i32 = tok
                    .parse()
                    .map_err(|_| parse_err(lno, c + 1, format!("invalid shift '{tok}'")))?;
                if shift == z_max as i32 {
                    if opts.strict {
                        return Err(Error::Validation(format!(
                            "shift {shift} at row {row}, col {c} equals z_max (strict mode)"
                        )));
                    }
                    warn!("shift {shift} at row {row}, col {c} equals z_max; reduced to 0");
                    shift = 0;
                }
                entries.push(shift);
            }
            row += 1;
        }
        if row != rows {
            return Err(parse_err(
                text.lines().count(),
                1,
                format!("expected {rows} matrix rows, found {row}"),
            ));
        }
        BaseGraph::new(rows, cols, info_cols, z_max, entries, punctured)
    }

    pub fn load(path: impl AsRef<Path>, opts: LoadOptions) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, opts)
    }

    /// 5G NR base graph 1 with the shift set that contains Z = 2^k
    /// (lifting sizes 2..=256).
    pub fn nr_bg1_set0() -> Self {
        Self::parse(
            include_str!("../../assets/bg1_ils0.txt"),
            LoadOptions::default(),
        )
        .expect("bundled asset is valid")
    }

    /// 5G NR base graph 1 with the shift set of Z = 3 * 2^k (up to 384).
    pub fn nr_bg1_set1() -> Self {
        Self::parse(
            include_str!("../../assets/bg1_ils1.txt"),
            LoadOptions::default(),
        )
        .expect("bundled asset is valid")
    }

    /// Serializes back into the asset format.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {} {}\n",
            self.rows, self.cols, self.info_cols, self.z_max
        );
        if !self.punctured.is_empty() {
            out.push_str("punctured");
            for p in &self.punctured {
                out.push_str(&format!(" {p}"));
            }
            out.push('\n');
        }
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| self.shift(r, c).to_string())
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// SHA-256 of the canonical text form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn info_cols(&self) -> usize {
        self.info_cols
    }

    pub fn z_max(&self) -> usize {
        self.z_max
    }

    pub fn punctured(&self) -> &[usize] {
        &self.punctured
    }

    pub fn is_punctured(&self, col: usize) -> bool {
        self.punctured.contains(&col)
    }

    #[inline]
    pub fn shift(&self, row: usize, col: usize) -> i32 {
        self.entries[row * self.cols + col]
    }

    pub fn has_edge(&self, row: usize, col: usize) -> bool {
        self.shift(row, col) != NO_EDGE
    }

    pub fn row_degree(&self, row: usize) -> usize {
        (0..self.cols).filter(|&c| self.has_edge(row, c)).count()
    }

    pub fn col_degree(&self, col: usize) -> usize {
        (0..self.rows).filter(|&r| self.has_edge(r, col)).count()
    }

    pub fn edge_count(&self) -> usize {
        self.entries.iter().filter(|&&e| e != NO_EDGE).count()
    }

    /// Number of base columns that are actually transmitted.
    pub fn transmitted_cols(&self) -> usize {
        self.cols - self.punctured.len()
    }

    /// `info_cols / transmitted_cols`.
    pub fn rate(&self) -> f64 {
        self.info_cols as f64 / self.transmitted_cols() as f64
    }

    /// Number of leading rows that must be solved jointly when encoding.
    ///
    /// Every later row `r` is an extension row: its only parity entry at or
    /// beyond column `info_cols + core_rows` is the unshifted diagonal
    /// element at `info_cols + r`.
    pub fn core_rows(&self) -> usize {
        let info = self.info_cols;
        (0..=self.rows)
            .find(|&g| {
                let core_ok = (0..g).all(|r| (info + g..self.cols).all(|c| !self.has_edge(r, c)));
                let ext_ok = (g..self.rows).all(|r| {
                    self.shift(r, info + r) == 0
                        && (info + r + 1..self.cols).all(|c| !self.has_edge(r, c))
                });
                core_ok && ext_ok
            })
            .unwrap_or(self.rows)
    }

    /// Keeps the first `rows` rows and the matching parity columns.
    pub fn truncate(&self, rows: usize) -> Result<Self> {
        if rows == 0 || rows > self.rows {
            return Err(Error::Validation(format!(
                "cannot keep {rows} of {} rows",
                self.rows
            )));
        }
        let cols = self.info_cols + rows;
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            entries.extend((0..cols).map(|c| self.shift(r, c)));
        }
        let punctured = self
            .punctured
            .iter()
            .copied()
            .filter(|&p| p < cols)
            .collect();
        BaseGraph::new(rows, cols, self.info_cols, self.z_max, entries, punctured)
    }

    /// Drops trailing parity rows/columns to approach `target`.
    ///
    /// The kept graph satisfies `|info / target - transmitted| <= 1` base
    /// columns. The information part is never modified.
    pub fn rate_adapt(&self, target: Rate) -> Result<Self> {
        let min_rows = self.core_rows().max(1);
        let transmitted = |rows: usize| {
            let cols = self.info_cols + rows;
            cols - self.punctured.iter().filter(|&&p| p < cols).count()
        };
        let wanted = self.info_cols as f64 / target.value();
        let best = (min_rows..=self.rows)
            .min_by(|&a, &b| {
                let da = (transmitted(a) as f64 - wanted).abs();
                let db = (transmitted(b) as f64 - wanted).abs();
                da.partial_cmp(&db).unwrap().then(a.cmp(&b))
            })
            .expect("non-empty row range");
        if (transmitted(best) as f64 - wanted).abs() > 1.0 {
            return Err(Error::UnachievableRate {
                target: target.to_string(),
                min: self.info_cols as f64 / transmitted(self.rows) as f64,
                max: self.info_cols as f64 / transmitted(min_rows) as f64,
            });
        }
        if best == self.rows {
            return Ok(self.clone());
        }
        self.truncate(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "2 4 2 4\n0 -1 0 0\n-1 1 0 -1\n";

    #[test]
    fn parses_toy_graph() {
        let bg = BaseGraph::parse(TOY, LoadOptions::default()).unwrap();
        assert_eq!((bg.rows(), bg.cols(), bg.info_cols()), (2, 4, 2));
        assert_eq!(bg.shift(0, 0), 0);
        assert_eq!(bg.shift(0, 1), NO_EDGE);
        assert_eq!(bg.shift(1, 1), 1);
        assert_eq!(bg.edge_count(), 5);
        assert_eq!(
            BaseGraph::parse(&bg.to_text(), LoadOptions::default()).unwrap(),
            bg
        );
    }

    #[test]
    fn shift_equal_to_z_max_is_reduced_or_rejected() {
        let text = "2 4 2 4\n4 -1 0 0\n-1 1 0 -1\n";
        let bg = BaseGraph::parse(text, LoadOptions::default()).unwrap();
        assert_eq!(bg.shift(0, 0), 0);
        let strict = BaseGraph::parse(text, LoadOptions { strict: true });
        assert!(matches!(strict, Err(Error::Validation(_))));
    }

    #[test]
    fn out_of_range_and_malformed_assets() {
        let big = "2 4 2 4\n5 -1 0 0\n-1 1 0 -1\n";
        assert!(matches!(
            BaseGraph::parse(big, LoadOptions::default()),
            Err(Error::Validation(_))
        ));
        let short = "2 4 2 4\n0 -1 0\n-1 1 0 -1\n";
        match BaseGraph::parse(short, LoadOptions::default()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let garbage = "2 4 2 4\n0 -1 x 0\n-1 1 0 -1\n";
        match BaseGraph::parse(garbage, LoadOptions::default()) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bg1_dimensions() {
        let bg = BaseGraph::nr_bg1_set0();
        assert_eq!((bg.rows(), bg.cols(), bg.info_cols()), (46, 68, 22));
        assert_eq!(bg.punctured(), &[0, 1]);
        assert_eq!(bg.edge_count(), 316);
        assert_eq!(bg.core_rows(), 4);
        assert_eq!(BaseGraph::nr_bg1_set1().z_max(), 384);
    }

    #[test]
    fn rate_adaptation_arithmetic() {
        let bg = BaseGraph::nr_bg1_set0();
        let r13 = bg.rate_adapt(Rate::new(1, 3)).unwrap();
        assert_eq!(r13.rows(), 46);
        assert_eq!(r13.transmitted_cols(), 66);
        let r23 = bg.rate_adapt(Rate::new(2, 3)).unwrap();
        assert_eq!(r23.rows(), 13);
        assert_eq!(r23.transmitted_cols(), 33);
        let r1112 = bg.rate_adapt(Rate::new(11, 12)).unwrap();
        assert_eq!(r1112.rows(), 4);
        let r56 = bg.rate_adapt(Rate::new(5, 6)).unwrap();
        assert!((22.0 / (5.0 / 6.0) - r56.transmitted_cols() as f64).abs() <= 1.0);
        assert!(matches!(
            bg.rate_adapt(Rate::new(1, 5)),
            Err(Error::UnachievableRate { .. })
        ));
        let toy = BaseGraph::parse(TOY, LoadOptions::default()).unwrap();
        assert_eq!(toy.rate_adapt(Rate::new(1, 2)).unwrap(), toy);
    }

    #[test]
    fn rate_parsing() {
        assert_eq!("2/3".parse::<Rate>().unwrap(), Rate::new(2, 3));
        assert!("3/2".parse::<Rate>().is_err());
        assert!("abc".parse::<Rate>().is_err());
    }
}
