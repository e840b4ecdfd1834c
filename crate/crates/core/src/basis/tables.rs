use super::legendre::Normalization;
use crate::{Error, Result};
use std::io::Write;

/// Largest degree whose product coefficients fit the exact integer path.
pub const MAX_TABLE_DEGREE: usize = 30;

/// Monomial coefficients `C_{m,n,k}` of `L_m L_n` and `C'_{m,n,k}` of
/// `L_m' L_n` for `0 ≤ m, n ≤ p`.
///
/// Coefficients are formed from exact integer numerators over `2^{m+n}`,
/// so each stored value is the correctly rounded rational (times the
/// orthonormal scaling, when selected).
#[derive(Clone, Debug, PartialEq)]
pub struct LegendreProductTables {
    p: usize,
    norm: Normalization,
    c: Vec<Vec<Vec<f64>>>,
    cp: Vec<Vec<Vec<f64>>>,
}

/// Numerators of `2^n P_n(t)`, lowest degree first.
fn numerators(n: usize) -> Vec<i128> {
    let binom = |n: usize, k: usize| -> i128 {
        let mut r: i128 = 1;
        for i in 0..k {
            r = r * (n - i) as i128 / (i + 1) as i128;
        }
        r
    };
    let mut out = vec![0i128; n + 1];
    for k in 0..=n / 2 {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        out[n - 2 * k] = sign * binom(n, k) * binom(2 * n - 2 * k, n);
    }
    out
}

fn convolve(a: &[i128], b: &[i128]) -> Vec<i128> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn build_product_tables(p: usize, norm: Normalization) -> Result<LegendreProductTables> {
    let mut t = LegendreProductTables {
        p: 0,
        norm,
        c: Vec::new(),
        cp: Vec::new(),
    };
    t.fill(0, p)?;
    t.p = p;
    Ok(t)
}

impl LegendreProductTables {
    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn normalization(&self) -> Normalization {
        self.norm
    }

    /// `C_{m,n,k}`, zero outside `0..=m+n`.
    pub fn c(&self, m: usize, n: usize, k: usize) -> f64 {
        self.c[m][n].get(k).copied().unwrap_or(0.0)
    }

    /// `C'_{m,n,k}`, zero outside `0..m+n`.
    pub fn cprime(&self, m: usize, n: usize, k: usize) -> f64 {
        self.cp[m][n].get(k).copied().unwrap_or(0.0)
    }

    /// Grow the tables to degree `p`, adding only rows and columns above the
    /// current degree.
    pub fn extend(&mut self, p: usize) -> Result<()> {
        if p < self.p {
            return Err(Error::DegreeRegression {
                from: self.p,
                to: p,
            });
        }
        if p > self.p {
            self.fill(self.p + 1, p)?;
            self.p = p;
        }
        Ok(())
    }

    fn fill(&mut self, lo: usize, hi: usize) -> Result<()> {
        if hi > MAX_TABLE_DEGREE {
            return Err(Error::UnsupportedDegree(hi));
        }
        let nums: Vec<Vec<i128>> = (0..=hi).map(numerators).collect();
        let ders: Vec<Vec<i128>> = nums
            .iter()
            .map(|a| {
                a.iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, &x)| k as i128 * x)
                    .collect()
            })
            .collect();
        self.c.resize(hi + 1, Vec::new());
        self.cp.resize(hi + 1, Vec::new());
        for m in 0..=hi {
            let start = if m >= lo { 0 } else { lo };
            debug_assert_eq!(self.c[m].len(), start);
            for n in start..=hi {
                let scale = match self.norm {
                    Normalization::Orthogonal => 1.0,
                    Normalization::Orthonormal => (((2 * m + 1) * (2 * n + 1)) as f64).sqrt() * 0.5,
                };
                let den = 2f64.powi((m + n) as i32);
                let conv = |v: Vec<i128>| -> Vec<f64> {
                    v.into_iter().map(|x| x as f64 / den * scale).collect()
                };
                self.c[m].push(conv(convolve(&nums[m], &nums[n])));
                self.cp[m].push(conv(convolve(&ders[m], &nums[n])));
            }
        }
        Ok(())
    }

    /// Write `m, n, k, c, cprime` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["m", "n", "k", "c", "cprime"])?;
        for m in 0..=self.p {
            for n in 0..=self.p {
                for k in 0..=m + n {
                    wr.write_record([
                        m.to_string(),
                        n.to_string(),
                        k.to_string(),
                        format!("{:e}", self.c(m, n, k)),
                        format!("{:e}", self.cprime(m, n, k)),
                    ])?;
                }
            }
        }
        wr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::legendre::legendre_eval;
    use super::*;

    #[test]
    fn small_entries() {
        let t = build_product_tables(3, Normalization::Orthogonal).unwrap();
        assert_eq!(t.c(0, 0, 0), 1.0);
        assert_eq!(t.c(0, 0, 1), 0.0);
        assert_eq!(t.c(1, 1, 2), 1.0);
        assert_eq!(t.c(1, 1, 0), 0.0);
        assert_eq!(t.cprime(2, 0, 1), 3.0);
    }

    #[test]
    fn reconstruction_parity_symmetry() {
        for norm in [Normalization::Orthogonal, Normalization::Orthonormal] {
            let t = build_product_tables(12, norm).unwrap();
            for m in 0..=12 {
                for n in 0..=12 {
                    for k in 0..=m + n {
                        assert_eq!(t.c(m, n, k), t.c(n, m, k));
                        if (k + m + n) % 2 == 1 {
                            assert_eq!(t.c(m, n, k), 0.0);
                        } else if m + n > 0 && (k + m + n - 1) % 2 == 1 {
                            assert_eq!(t.cprime(m, n, k), 0.0);
                        }
                    }
                    for s in 0..32 {
                        let x = -1.0 + (s as f64 + 0.5) / 16.0;
                        let (lm, dm) = legendre_eval(m, x, norm);
                        let (ln, _) = legendre_eval(n, x, norm);
                        let r: f64 = (0..=m + n).map(|k| t.c(m, n, k) * x.powi(k as i32)).sum();
                        let rp: f64 = (0..=m + n)
                            .map(|k| t.cprime(m, n, k) * x.powi(k as i32))
                            .sum();
                        let mag: f64 = (0..=m + n)
                            .map(|k| (t.c(m, n, k) * x.powi(k as i32)).abs())
                            .sum();
                        let magp: f64 = (0..=m + n)
                            .map(|k| (t.cprime(m, n, k) * x.powi(k as i32)).abs())
                            .sum();
                        // Relative to the size of the expansion terms.
                        assert!((r - lm * ln).abs() <= 1e-12 * mag.max(1.0), "{m} {n} {x}");
                        assert!((rp - dm * ln).abs() <= 1e-12 * magp.max(1.0), "{m} {n} {x}");
                    }
                }
            }
        }
    }

    #[test]
    fn extension_matches_fresh_build() {
        let mut t = build_product_tables(4, Normalization::Orthonormal).unwrap();
        t.extend(9).unwrap();
        assert_eq!(
            t,
            build_product_tables(9, Normalization::Orthonormal).unwrap()
        );
        assert!(t.extend(3).is_err());
        assert!(build_product_tables(MAX_TABLE_DEGREE + 1, Normalization::Orthogonal).is_err());
    }
}
