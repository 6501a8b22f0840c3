//! Classical fourth-order Runge–Kutta on a grid uniform in `s = √t`.
//!
//! The receivers' success probabilities behave like `√t` near `t = 0`
//! (the flat-prior Dolinar equation is singular there, and the agnostic
//! equation approaches it for many training copies). In the variable
//! `s = √t` these trajectories are smooth, so a fixed step in `s` keeps the
//! fourth-order convergence that a fixed step in `t` loses.

/// Samples of an integrated trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> [f64; N] {
        *self.states.last().expect("trajectory has at least one sample")
    }
}

/// Integrates `dy/dt = f(t, y)` from `t_start` to `t_end` in `steps` RK4
/// steps of equal size in `√t`.
///
/// When `record` is false only the endpoints are kept.
pub fn rk4_sqrt_time<const N: usize, F>(
    mut f: F,
    t_start: f64,
    t_end: f64,
    y0: [f64; N],
    steps: usize,
    record: bool,
) -> Trajectory<N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    assert!(steps > 0);
    assert!(t_start >= 0.0 && t_end > t_start);
    let s0 = t_start.sqrt();
    let s1 = t_end.sqrt();
    let h = (s1 - s0) / steps as f64;

    // dy/ds = 2 s f(s², y)
    let mut g = |s: f64, y: &[f64; N]| {
        let d = f(s * s, y);
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = 2.0 * s * d[i];
        }
        out
    };

    let capacity = if record { steps + 1 } else { 2 };
    let mut times = Vec::with_capacity(capacity);
    let mut states = Vec::with_capacity(capacity);
    times.push(t_start);
    states.push(y0);

    let mut y = y0;
    for i in 0..steps {
        let s = s0 + h * i as f64;
        let k1 = g(s, &y);
        let k2 = g(s + 0.5 * h, &axpy(&y, 0.5 * h, &k1));
        let k3 = g(s + 0.5 * h, &axpy(&y, 0.5 * h, &k2));
        let k4 = g(s + h, &axpy(&y, h, &k3));
        for j in 0..N {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if record || i + 1 == steps {
            let s_next = if i + 1 == steps { s1 } else { s0 + h * (i + 1) as f64 };
            times.push(s_next * s_next);
            states.push(y);
        }
    }
    Trajectory { times, states }
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], a: f64, x: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * x[i];
    }
    out
}
