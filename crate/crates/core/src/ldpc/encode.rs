//! Systematic encoder obtained from one Gaussian elimination of the parity
//! matrix over GF(2).

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BitRow(Vec<u64>);

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len.div_ceil(64)])
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.0[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    /// Parity of `self & other`.
    #[inline]
    pub fn dot(&self, other: &BitRow) -> u8 {
        let ones: u32 = self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones()).sum();
        (ones & 1) as u8
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut row = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                row.set(i);
            }
        }
        row
    }
}

/// Parity bit `parity_positions[r]` equals `rows[r] . info`.
#[derive(Debug, Clone)]
pub(crate) struct SystematicEncoder {
    pub info_positions: Vec<usize>,
    pub parity_positions: Vec<usize>,
    rows: Vec<BitRow>,
}

impl SystematicEncoder {
    /// Row-reduces `checks` (variable lists per row). The pivot columns carry
    /// parity; the remaining `n - rank` columns carry information.
    pub fn from_checks(n: usize, checks: &[Vec<usize>]) -> Self {
        let mut rows: Vec<BitRow> = checks
            .iter()
            .map(|vars| {
                let mut r = BitRow::zeros(n);
                for &v in vars {
                    // repeated entries cancel
                    r.0[v / 64] ^= 1 << (v % 64);
                }
                r
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..n {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.get(col) {
                    row.xor_assign(&pivot);
                }
            }
            pivots.push(col);
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rows.truncate(rank);
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let k = info_positions.len();
        let parity_rows = rows
            .iter()
            .map(|row| {
                let mut out = BitRow::zeros(k);
                for (j, &c) in info_positions.iter().enumerate() {
                    if row.get(c) {
                        out.set(j);
                    }
                }
                out
            })
            .collect();
        Self {
            info_positions,
            parity_positions: pivots,
            rows: parity_rows,
        }
    }

    pub fn rank(&self) -> usize {
        self.parity_positions.len()
    }

    pub fn encode(&self, n: usize, info: &[u8]) -> Vec<u8> {
        let packed = BitRow::from_bits(info);
        let mut cw = vec![0u8; n];
        for (&pos, &b) in self.info_positions.iter().zip(info) {
            cw[pos] = b & 1;
        }
        for (&pos, row) in self.parity_positions.iter().zip(&self.rows) {
            cw[pos] = row.dot(&packed);
        }
        cw
    }
}
