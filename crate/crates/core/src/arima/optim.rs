//! Quasi-Newton (BFGS) minimisation with finite-difference gradients.

pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grad_norm: f64,
}

/// Finite-difference scheme for the gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Differences {
    Central,
    Forward,
}

fn gradient(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64], fx: f64, scheme: Differences) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = 1e-5 * x[i].abs().max(1.0);
            xp[i] = x[i] + h;
            let up = f(&xp);
            if scheme == Differences::Forward {
                xp[i] = x[i];
                return if up.is_finite() { (up - fx) / h } else { 0.0 };
            }
            xp[i] = x[i] - h;
            let down = f(&xp);
            xp[i] = x[i];
            match (up.is_finite(), down.is_finite()) {
                (true, true) => (up - down) / (2.0 * h),
                (true, false) => (up - fx) / h,
                (false, true) => (fx - down) / h,
                (false, false) => 0.0,
            }
        })
        .collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimises `f` from `x0`. Non-finite values of `f` are treated as infeasible.
pub(crate) fn bfgs(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: Vec<f64>,
    max_iter: usize,
    gtol: f64,
    scheme: Differences,
) -> Minimum {
    let n = x0.len();
    let mut x = x0;
    let mut fx = f(&x);
    if !fx.is_finite() || n == 0 {
        return Minimum {
            x,
            fx,
            iterations: 0,
            converged: fx.is_finite(),
            grad_norm: 0.0,
        };
    }
    let mut g = gradient(&mut f, &x, fx, scheme);
    let mut h = identity(n);
    let mut fresh = true;
    let mut stalls = 0;
    for iter in 1..=max_iter {
        let gn = inf_norm(&g);
        if gn < gtol {
            return Minimum { x, fx, iterations: iter - 1, converged: true, grad_norm: gn };
        }
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            h = identity(n);
            fresh = true;
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-14 {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let fxn = f(&xn);
            if fxn.is_finite() && fxn <= fx + 1e-4 * step * slope {
                accepted = Some((xn, fxn));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fxn)) = accepted else {
            if !fresh {
                h = identity(n);
                fresh = true;
                continue;
            }
            // No descent possible along the gradient: a numerically flat optimum.
            return Minimum { x, fx, iterations: iter, converged: gn < 1e-4, grad_norm: gn };
        };
        let gnew = gradient(&mut f, &xn, fxn, scheme);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if fresh {
                let scale = sy / dot(&y, &y);
                h.iter_mut().for_each(|v| *v *= scale);
            }
            bfgs_update(&mut h, &s, &y, sy, n);
            fresh = false;
        }
        let decrease = fx - fxn;
        x = xn;
        g = gnew;
        let done = decrease <= 1e-13 * (fx.abs() + 1e-10);
        fx = fxn;
        stalls = if done { stalls + 1 } else { 0 };
        if stalls >= 2 {
            let gn = inf_norm(&g);
            return Minimum { x, fx, iterations: iter, converged: true, grad_norm: gn };
        }
    }
    let gn = inf_norm(&g);
    Minimum { x, fx, iterations: max_iter, converged: gn < gtol, grad_norm: gn }
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64, n: usize) {
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
        }
    }
}
