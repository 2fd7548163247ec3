//! Nelder-Mead restricted to a box. The simplex lives in unbounded angle
//! coordinates `u` with `x = lo + (hi - lo) (1 + sin u) / 2`, so every trial
//! point is feasible and a bound is reached at a smooth stationary point of
//! the map. Projecting trial points onto the box instead flattens the simplex
//! against a face and stalls next to boundary optima.

use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop when the spread of simplex values falls below this (absolute, so
    /// that shifting `f` by a constant leaves the path unchanged).
    pub f_tol: f64,
    /// Stop when every simplex edge, in angle coordinates relative to `pi`,
    /// is below this.
    pub x_tol: f64,
    /// Initial step in angle coordinates, as a fraction of `pi`.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_evals: 400,
            f_tol: 1e-9,
            x_tol: 1e-7,
            initial_step: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

fn clamp_into(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for i in 0..x.len() {
        x[i] = x[i].clamp(lo[i], hi[i]);
    }
}

fn to_box(u: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let mut x: Vec<f64> = (0..u.len())
        .map(|i| lo[i] + (hi[i] - lo[i]) * 0.5 * (1.0 + u[i].sin()))
        .collect();
    clamp_into(&mut x, lo, hi);
    x
}

fn to_angle(x: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let w = hi[i] - lo[i];
            if w > 0.0 {
                (2.0 * (x[i] - lo[i]) / w - 1.0).clamp(-1.0, 1.0).asin()
            } else {
                0.0
            }
        })
        .collect()
}

/// Minimizes `f` over the box `[lo, hi]` starting from `x0`. Non-finite
/// values are treated as `+∞`. The simplex is rebuilt around the incumbent
/// until a rebuild stops improving.
pub fn minimize_in_box(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: &NelderMeadOptions,
) -> Minimum {
    let mut best = single_run(&mut f, x0, lo, hi, opts);
    while best.evals < opts.max_evals && !x0.is_empty() {
        let budget = NelderMeadOptions {
            max_evals: opts.max_evals - best.evals,
            ..*opts
        };
        let next = single_run(&mut f, &best.x, lo, hi, &budget);
        let evals = best.evals + next.evals;
        let improved = next.value < best.value - opts.f_tol;
        if next.value < best.value {
            best = Minimum { evals, ..next };
        } else {
            best.evals = evals;
        }
        if !improved {
            break;
        }
    }
    best
}

fn single_run(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: &NelderMeadOptions,
) -> Minimum {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |u: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(&to_box(u, lo, hi));
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut start = x0.to_vec();
    clamp_into(&mut start, lo, hi);
    let start = to_angle(&start, lo, hi);
    if n == 0 {
        let value = eval(&start, &mut evals);
        return Minimum {
            x: Vec::new(),
            value,
            evals,
        };
    }
    let step = opts.initial_step * PI;
    let mut simplex: Vec<Vec<f64>> = vec![start.clone()];
    for i in 0..n {
        let mut v = start.clone();
        // towards the box centre, so a start on a bound still moves
        v[i] += if v[i] > 0.0 { -step } else { step };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let size = (1..=n)
            .map(|k| {
                (0..n)
                    .map(|i| ((simplex[k][i] - simplex[0][i]) / PI).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if (spread.is_finite() && spread <= opts.f_tol) || size <= opts.x_tol {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|v| v[i]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|i| centroid[i] + t * (simplex[n][i] - centroid[i]))
                .collect::<Vec<f64>>()
        };
        let xr = along(-alpha);
        let fr = eval(&xr, &mut evals);
        if fr < values[0] {
            let xe = along(-gamma);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = along(-rho);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(rho);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for k in 1..=n {
                    let p: Vec<f64> = (0..n)
                        .map(|i| simplex[0][i] + sigma * (simplex[k][i] - simplex[0][i]))
                        .collect();
                    values[k] = eval(&p, &mut evals);
                    simplex[k] = p;
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("nonempty simplex");
    Minimum {
        x: to_box(&simplex[best], lo, hi),
        value: values[best],
        evals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_interior_minimum() {
        let m = minimize_in_box(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 0.5).powi(2),
            &[0.0, 0.0],
            &[-5.0, -5.0],
            &[5.0, 5.0],
            &NelderMeadOptions::default(),
        );
        assert!((m.x[0] - 1.0).abs() < 1e-3 && (m.x[1] + 0.5).abs() < 1e-3, "{m:?}");
    }

    #[test]
    fn minimum_on_the_boundary() {
        let m = minimize_in_box(
            |x| (x[0] - 10.0).powi(2) + x[1].powi(2),
            &[0.0, 1.0],
            &[-1.0, -1.0],
            &[2.0, 2.0],
            &NelderMeadOptions::default(),
        );
        assert!((m.x[0] - 2.0).abs() < 1e-6 && m.x[1].abs() < 1e-3, "{m:?}");
    }

    #[test]
    fn rosenbrock() {
        let opts = NelderMeadOptions {
            max_evals: 5000,
            f_tol: 1e-14,
            x_tol: 1e-10,
            ..Default::default()
        };
        let m = minimize_in_box(
            |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[-1.2, 1.0],
            &[-3.0, -3.0],
            &[3.0, 3.0],
            &opts,
        );
        assert!((m.x[0] - 1.0).abs() < 1e-3 && (m.x[1] - 1.0).abs() < 1e-3, "{m:?}");
    }

    #[test]
    fn infinite_region_is_avoided() {
        let m = minimize_in_box(
            |x| if x[0] < 0.5 { f64::INFINITY } else { (x[0] - 0.7).powi(2) },
            &[0.9],
            &[0.0],
            &[1.0],
            &NelderMeadOptions::default(),
        );
        assert!((m.x[0] - 0.7).abs() < 1e-3);
    }
}
