//! Regular LDPC codes: construction, systematic encoding, sum-product
//! decoding and alist export.

mod construct;
mod decode;
mod encode;

pub use decode::DecodeResult;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use encode::SystematicEncoder;

/// Default decoder iteration budget.
pub const DEFAULT_MAX_ITER: usize = 100;

const MAX_BUILD_ATTEMPTS: usize = 64;

/// Construction diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstructionReport {
    /// Rows whose final weight differs from the target check degree.
    pub degree_repairs: usize,
    /// Edges placed while closing a 4-cycle (only when no alternative exists).
    pub forced_short_cycles: usize,
    /// Placement runs discarded for a rank-deficient parity matrix.
    pub rank_retries: usize,
}

/// A binary LDPC code with its Tanner graph in compressed form.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    n: usize,
    m: usize,
    checks: Vec<Vec<usize>>,
    // edges in check-major order
    check_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    var_ptr: Vec<usize>,
    var_edges: Vec<usize>,
    encoder: SystematicEncoder,
    report: ConstructionReport,
}

impl LdpcCode {
    /// Builds a `(dv, dc)`-regular code of length `n` and the given rate,
    /// deterministically from `seed`. Placement is retried until the parity
    /// matrix has full row rank.
    pub fn build(n: usize, rate: f64, dv: usize, dc: usize, seed: u64) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::Config(format!("code length must be positive and even, got {n}")));
        }
        if dv == 0 || dc == 0 {
            return Err(Error::Config("degrees must be positive".into()));
        }
        let m_real = n as f64 * (1.0 - rate);
        let m = m_real.round() as usize;
        if !(rate > 0.0 && rate < 1.0) || (m_real - m as f64).abs() > 1e-9 || m == 0 {
            return Err(Error::Config(format!("rate {rate} does not give an integer number of checks for n={n}")));
        }
        if m * dc != n * dv {
            return Err(Error::Config(format!(
                "infeasible degree profile: {m} checks x degree {dc} != {n} variables x degree {dv}"
            )));
        }
        if dv > m {
            return Err(Error::Config(format!("variable degree {dv} exceeds {m} checks")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut retries = 0;
        loop {
            let placement = construct::peg(n, m, dv, dc, &mut rng);
            let mut code = Self::from_checks(n, placement.checks)?;
            if code.rank() == m || retries + 1 >= MAX_BUILD_ATTEMPTS {
                if code.rank() != m {
                    return Err(Error::Config(format!(
                        "no full-rank parity matrix after {MAX_BUILD_ATTEMPTS} attempts"
                    )));
                }
                code.report.degree_repairs = code.checks.iter().filter(|r| r.len() != dc).count();
                code.report.forced_short_cycles = placement.forced_short_cycles;
                code.report.rank_retries = retries;
                return Ok(code);
            }
            retries += 1;
        }
    }

    /// Wraps an explicit parity matrix given as the variable list of each row.
    pub fn from_checks(n: usize, mut checks: Vec<Vec<usize>>) -> Result<Self> {
        for row in checks.iter_mut() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Config("duplicate entry in a parity-check row".into()));
            }
            if let Some(&v) = row.iter().find(|&&v| v >= n) {
                return Err(Error::Config(format!("column index {v} out of range for n={n}")));
            }
        }
        let m = checks.len();
        let mut check_ptr = Vec::with_capacity(m + 1);
        let mut edge_var = Vec::new();
        check_ptr.push(0);
        for row in &checks {
            edge_var.extend_from_slice(row);
            check_ptr.push(edge_var.len());
        }
        let mut per_var: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (e, &v) in edge_var.iter().enumerate() {
            per_var[v].push(e);
        }
        let mut var_ptr = Vec::with_capacity(n + 1);
        let mut var_edges = Vec::with_capacity(edge_var.len());
        var_ptr.push(0);
        for es in &per_var {
            var_edges.extend_from_slice(es);
            var_ptr.push(var_edges.len());
        }
        let encoder = SystematicEncoder::from_checks(n, &checks);
        Ok(Self {
            n,
            m,
            checks,
            check_ptr,
            edge_var,
            var_ptr,
            var_edges,
            encoder,
            report: ConstructionReport::default(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of information bits, `n - rank(H)`.
    pub fn k(&self) -> usize {
        self.encoder.info_positions.len()
    }

    /// Number of parity-check rows.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rank(&self) -> usize {
        self.encoder.rank()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    /// Variable indices of each parity-check row.
    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    /// Codeword positions that carry the information bits, in order.
    pub fn info_positions(&self) -> &[usize] {
        &self.encoder.info_positions
    }

    pub fn report(&self) -> &ConstructionReport {
        &self.report
    }

    pub fn column_weights(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.var_ptr[v + 1] - self.var_ptr[v]).collect()
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k() {
            return Err(Error::Dimension {
                what: "information block",
                expected: self.k(),
                got: info.len(),
            });
        }
        Ok(self.encoder.encode(self.n, info))
    }

    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        self.checks
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &v| acc ^ (bits[v] & 1)) == 0)
    }

    pub fn extract_info(&self, codeword: &[u8]) -> Vec<u8> {
        self.encoder.info_positions.iter().map(|&p| codeword[p]).collect()
    }

    /// Parity matrix in alist text format (1-based indices, zero padded).
    pub fn to_alist(&self) -> String {
        let col_w = self.column_weights();
        let max_col = col_w.iter().copied().max().unwrap_or(0);
        let max_row = self.checks.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = format!("{} {}\n{} {}\n", self.n, self.m, max_col, max_row);
        let join = |v: Vec<String>| v.join(" ");
        out += &join(col_w.iter().map(|w| w.to_string()).collect());
        out.push('\n');
        out += &join(self.checks.iter().map(|r| r.len().to_string()).collect());
        out.push('\n');
        for v in 0..self.n {
            let mut rows: Vec<String> = self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]]
                .iter()
                .map(|&e| (self.edge_check(e) + 1).to_string())
                .collect();
            rows.resize(max_col, "0".into());
            out += &join(rows);
            out.push('\n');
        }
        for row in &self.checks {
            let mut cols: Vec<String> = row.iter().map(|&v| (v + 1).to_string()).collect();
            cols.resize(max_row, "0".into());
            out += &join(cols);
            out.push('\n');
        }
        out
    }

    /// Parses the alist format written by [`LdpcCode::to_alist`].
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut nums = |what: &str| -> Result<Vec<usize>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("alist truncated before {what}")))?;
            line.split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("{what}: {e}"))))
                .collect()
        };
        let dims = nums("dimensions")?;
        if dims.len() != 2 {
            return Err(Error::Parse("alist dimension line needs two numbers".into()));
        }
        let (n, m) = (dims[0], dims[1]);
        nums("max weights")?;
        nums("column weights")?;
        let row_w = nums("row weights")?;
        for v in 0..n {
            nums(&format!("column {v}"))?;
        }
        let mut checks = Vec::with_capacity(m);
        for r in 0..m {
            let cols = nums(&format!("row {r}"))?;
            let row: Vec<usize> = cols.into_iter().filter(|&c| c > 0).map(|c| c - 1).collect();
            if row.len() != *row_w.get(r).unwrap_or(&usize::MAX) {
                return Err(Error::Parse(format!("row {r} weight mismatch")));
            }
            checks.push(row);
        }
        Self::from_checks(n, checks)
    }

    fn edge_check(&self, e: usize) -> usize {
        // check_ptr is sorted; find the row containing edge e
        self.check_ptr.partition_point(|&p| p <= e) - 1
    }
}
