//! Exact Gaussian likelihood of a stationary ARMA process via the Kalman
//! filter on the Harvey state-space form.
//!
//! The covariance is carried in units of the innovation variance, so the
//! variance can be concentrated out of the likelihood. Several series that
//! share the same ARMA dynamics (the response and each regressor) are
//! filtered in lockstep; their gains are identical.

use crate::error::{Error, Result};

pub(crate) struct ArmaFilter {
    r: usize,
    phi: Vec<f64>,
    rv: Vec<f64>,
    p0: Vec<f64>,
}

pub(crate) struct FilterOutput {
    pub sum_ln_f: f64,
    /// One-step-ahead predictions of each series past its last observation.
    pub next: Vec<f64>,
}

impl ArmaFilter {
    /// `ar` holds `phi` of `1 - sum phi_i B^i`, `ma` holds `theta` of `1 + sum theta_i B^i`.
    pub fn new(ar: &[f64], ma: &[f64]) -> Result<Self> {
        let r = ar.len().max(ma.len() + 1);
        let mut phi = vec![0.0; r];
        phi[..ar.len()].copy_from_slice(ar);
        let mut rv = vec![0.0; r];
        rv[0] = 1.0;
        rv[1..=ma.len()].copy_from_slice(ma);
        let p0 = stationary_covariance(&phi, &rv)?;
        Ok(Self { r, phi, rv, p0 })
    }

    /// Runs the filter. `visit(t, w)` receives the standardized innovations
    /// `v_t / sqrt(F_t)` of every series at time `t`.
    pub fn run(&self, series: &[&[f64]], mut visit: impl FnMut(usize, &[f64])) -> Result<FilterOutput> {
        let r = self.r;
        let k = series.len();
        let n = series.first().map_or(0, |s| s.len());
        let mut a = vec![0.0; k * r];
        let mut p = self.p0.clone();
        let mut pf = vec![0.0; r * r];
        let mut pn = vec![0.0; r * r];
        let mut gain = vec![0.0; r];
        let mut white = vec![0.0; k];
        let mut steady = false;
        let mut sum_ln_f = 0.0;
        let mut f = p[0];
        let mut sf = f.sqrt();
        for t in 0..n {
            if !steady {
                f = p[0];
                if !(f > 0.0 && f.is_finite()) {
                    return Err(Error::Input("non-positive prediction variance in Kalman filter".into()));
                }
                sf = f.sqrt();
                update_gain(&p, r, &mut gain);
            }
            for s in 0..k {
                let st = &mut a[s * r..(s + 1) * r];
                let v = series[s][t] - st[0];
                white[s] = v / sf;
                let a0 = st[0] + gain[0] * v;
                for i in 0..r {
                    let next = if i + 1 < r { st[i + 1] + gain[i + 1] * v } else { 0.0 };
                    st[i] = self.phi[i] * a0 + next;
                }
            }
            sum_ln_f += f.ln();
            visit(t, &white);
            if !steady {
                for i in 0..r {
                    for j in 0..r {
                        pf[i * r + j] = p[i * r + j] - p[i * r] * p[j] / f;
                    }
                }
                let mut diff: f64 = 0.0;
                for i in 0..r {
                    for j in 0..r {
                        let mut v = self.phi[i] * self.phi[j] * pf[0] + self.rv[i] * self.rv[j];
                        if j + 1 < r {
                            v += self.phi[i] * pf[j + 1];
                        }
                        if i + 1 < r {
                            v += pf[(i + 1) * r] * self.phi[j];
                            if j + 1 < r {
                                v += pf[(i + 1) * r + j + 1];
                            }
                        }
                        pn[i * r + j] = v;
                        diff = diff.max((v - p[i * r + j]).abs());
                    }
                }
                std::mem::swap(&mut p, &mut pn);
                if diff < 1e-13 {
                    steady = true;
                    f = p[0];
                    sf = f.sqrt();
                    update_gain(&p, r, &mut gain);
                }
            }
        }
        let next = (0..k).map(|s| a[s * r]).collect();
        Ok(FilterOutput { sum_ln_f, next })
    }
}

fn update_gain(p: &[f64], r: usize, gain: &mut [f64]) {
    let f = p[0];
    for i in 0..r {
        gain[i] = p[i * r] / f;
    }
}

/// Solves `P = T P T' + R R'` by the doubling algorithm.
fn stationary_covariance(phi: &[f64], rv: &[f64]) -> Result<Vec<f64>> {
    let r = phi.len();
    let mut a = vec![0.0; r * r];
    for i in 0..r {
        a[i * r] = phi[i];
        if i + 1 < r {
            a[i * r + i + 1] = 1.0;
        }
    }
    let mut p = vec![0.0; r * r];
    for i in 0..r {
        for j in 0..r {
            p[i * r + j] = rv[i] * rv[j];
        }
    }
    let mut tmp = vec![0.0; r * r];
    let mut apa = vec![0.0; r * r];
    for _ in 0..64 {
        // apa = a p a'
        matmul(&a, &p, &mut tmp, r);
        matmul_bt(&tmp, &a, &mut apa, r);
        let mut max_add: f64 = 0.0;
        let mut max_p: f64 = 0.0;
        for i in 0..r * r {
            p[i] += apa[i];
            max_add = max_add.max(apa[i].abs());
            max_p = max_p.max(p[i].abs());
        }
        if !max_p.is_finite() {
            break;
        }
        if max_add <= 1e-15 * max_p {
            return Ok(p);
        }
        matmul(&a, &a.clone(), &mut tmp, r);
        a.copy_from_slice(&tmp);
    }
    Err(Error::Input("ARMA process is not stationary".into()))
}

fn matmul(x: &[f64], y: &[f64], out: &mut [f64], r: usize) {
    for i in 0..r {
        for j in 0..r {
            out[i * r + j] = (0..r).map(|k| x[i * r + k] * y[k * r + j]).sum();
        }
    }
}

/// out = x * y'
fn matmul_bt(x: &[f64], y: &[f64], out: &mut [f64], r: usize) {
    for i in 0..r {
        for j in 0..r {
            out[i * r + j] = (0..r).map(|k| x[i * r + k] * y[j * r + k]).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ar1_initial_variance() {
        let f = ArmaFilter::new(&[0.5], &[]).unwrap();
        assert!((f.p0[0] - 1.0 / 0.75).abs() < 1e-12);
    }

    #[test]
    fn ma1_initial_state() {
        // gamma(0) = 1 + theta^2
        let f = ArmaFilter::new(&[], &[0.4]).unwrap();
        assert!((f.p0[0] - 1.16).abs() < 1e-12);
    }

    #[test]
    fn ar1_prediction_is_phi_times_last() {
        let f = ArmaFilter::new(&[0.5], &[]).unwrap();
        let y = [0.3, -1.0, 2.0];
        let out = f.run(&[&y], |_, _| {}).unwrap();
        assert!((out.next[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn innovations_match_direct_ar1_likelihood() {
        // exact AR(1): first innovation has variance 1/(1-phi^2), then 1
        let phi = 0.6;
        let y = [0.5, 0.1, -0.4, 0.9, 0.2];
        let f = ArmaFilter::new(&[phi], &[]).unwrap();
        let mut got = Vec::new();
        let out = f.run(&[&y], |_, w| got.push(w[0])).unwrap();
        let v0 = 1.0 / (1.0 - phi * phi);
        assert!((out.sum_ln_f - v0.ln()).abs() < 1e-12);
        assert!((got[0] - y[0] / v0.sqrt()).abs() < 1e-12);
        for t in 1..y.len() {
            assert!((got[t] - (y[t] - phi * y[t - 1])).abs() < 1e-12);
        }
    }
}
