/// Scaling of the univariate Legendre polynomials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `L_n(1) = 1`.
    Orthogonal,
    /// Unit `L2(-1, 1)` norm: `sqrt((2n+1)/2) L_n`.
    #[default]
    Orthonormal,
}

impl Normalization {
    pub fn factor(self, n: usize) -> f64 {
        match self {
            Normalization::Orthogonal => 1.0,
            Normalization::Orthonormal => ((2 * n + 1) as f64 / 2.0).sqrt(),
        }
    }
}

/// `(L_n(t), L_n'(t))`.
pub fn legendre_eval(n: usize, t: f64, norm: Normalization) -> (f64, f64) {
    let (v, d) = legendre_all(n, t, norm);
    (v[n], d[n])
}

/// Values and derivatives of `L_0, ..., L_p` at `t`.
pub fn legendre_all(p: usize, t: f64, norm: Normalization) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; p + 1];
    let mut d = vec![0.0; p + 1];
    v[0] = 1.0;
    if p >= 1 {
        v[1] = t;
        d[1] = 1.0;
    }
    for k in 1..p {
        let kf = k as f64;
        v[k + 1] = ((2.0 * kf + 1.0) * t * v[k] - kf * v[k - 1]) / (kf + 1.0);
        d[k + 1] = d[k - 1] + (2.0 * kf + 1.0) * v[k];
    }
    if norm == Normalization::Orthonormal {
        for k in 0..=p {
            let s = norm.factor(k);
            v[k] *= s;
            d[k] *= s;
        }
    }
    (v, d)
}
