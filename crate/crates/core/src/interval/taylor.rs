//! Truncated Taylor series with interval coefficients.
//!
//! Coefficient k stores f^(k)(u₀)/k!. When the expansion point u₀ is itself an
//! interval, every coefficient encloses its value over all of u₀, which is what
//! the Lagrange remainder needs.

use super::arith::Interval;

#[derive(Debug, Clone, PartialEq)]
pub struct Series(pub Vec<Interval>);

impl Series {
    pub fn constant(c: Interval, order: usize) -> Self {
        let mut v = vec![Interval::point(0.0); order + 1];
        v[0] = c;
        Series(v)
    }

    /// The independent variable expanded at `at`.
    pub fn variable(at: Interval, order: usize) -> Self {
        let mut s = Self::constant(at, order);
        if order >= 1 {
            s.0[1] = Interval::point(1.0);
        }
        s
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn add(&self, o: &Series) -> Series {
        Series(self.0.iter().zip(&o.0).map(|(&a, &b)| a + b).collect())
    }

    pub fn sub(&self, o: &Series) -> Series {
        Series(self.0.iter().zip(&o.0).map(|(&a, &b)| a - b).collect())
    }

    pub fn scale(&self, c: Interval) -> Series {
        Series(self.0.iter().map(|&a| a * c).collect())
    }

    pub fn add_constant(&self, c: Interval) -> Series {
        let mut out = self.clone();
        out.0[0] = out.0[0] + c;
        out
    }

    pub fn mul(&self, o: &Series) -> Series {
        let n = self.0.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.0[0] * o.0[k];
            for j in 1..=k {
                acc = acc + self.0[j] * o.0[k - j];
            }
            out.push(acc);
        }
        Series(out)
    }

    pub fn div(&self, o: &Series) -> Series {
        let n = self.0.len();
        let mut out: Vec<Interval> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.0[k];
            for j in 1..=k {
                acc = acc - o.0[j] * out[k - j];
            }
            out.push(acc / o.0[0]);
        }
        Series(out)
    }

    pub fn recip(&self) -> Series {
        Series::constant(Interval::point(1.0), self.order()).div(self)
    }

    pub fn exp(&self) -> Series {
        let n = self.0.len();
        let mut out = Vec::with_capacity(n);
        out.push(self.0[0].exp());
        for k in 1..n {
            let mut acc = Interval::point(0.0);
            for j in 1..=k {
                acc = acc + self.0[j] * out[k - j] * (j as f64);
            }
            out.push(acc / (k as f64));
        }
        Series(out)
    }

    /// ln of a series whose coefficients vanish beyond index 2 (a quadratic).
    pub fn ln_quadratic(&self) -> Series {
        let n = self.0.len();
        let w = &self.0;
        let mut out: Vec<Interval> = Vec::with_capacity(n);
        out.push(w[0].ln().unwrap_or(Interval::entire()));
        for k in 1..n {
            // k·l_k·w_0 = k·w_k − Σ_{j=k−2}^{k−1} j·l_j·w_{k−j}
            let mut acc = if k <= 2 { w[k] * (k as f64) } else { Interval::point(0.0) };
            for j in k.saturating_sub(2).max(1)..k {
                acc = acc - out[j] * w[k - j] * (j as f64);
            }
            out.push(acc / (w[0] * (k as f64)));
        }
        Series(out)
    }

    /// 1/f for a series with at most `support` leading nonzero coefficients.
    pub fn recip_sparse(&self, support: usize) -> Series {
        let n = self.0.len();
        let f = &self.0;
        let mut out: Vec<Interval> = Vec::with_capacity(n);
        out.push(Interval::point(1.0) / f[0]);
        for k in 1..n {
            let mut acc = Interval::point(0.0);
            for j in 1..=k.min(support - 1) {
                acc = acc - f[j] * out[k - j];
            }
            out.push(acc / f[0]);
        }
        Series(out)
    }

    pub fn sqrt(&self) -> Series {
        let n = self.0.len();
        let mut out: Vec<Interval> = Vec::with_capacity(n);
        out.push(self.0[0].sqrt_or_nan());
        let twice = out[0] * 2.0;
        for k in 1..n {
            let mut acc = self.0[k];
            for j in 1..k {
                acc = acc - out[j] * out[k - j];
            }
            out.push(acc / twice);
        }
        Series(out)
    }
}
