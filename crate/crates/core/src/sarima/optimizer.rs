//! Derivative-free simplex minimization.

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimize `f` with the Nelder-Mead simplex method.
///
/// Non-finite objective values are treated as `+inf`. The search is
/// converged when, over a full cycle of `dim + 1` iterations, the best value
/// improved by less than `tol` and the simplex values span less than
/// `tol * (1 + |best|)`.
pub fn nelder_mead<F>(
    mut f: F,
    x0: &[f64],
    step: f64,
    tol: f64,
    max_evals: usize,
) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    if dim == 0 {
        let value = eval(x0, &mut evaluations);
        return NelderMeadResult {
            x: Vec::new(),
            value,
            evaluations,
            converged: value.is_finite(),
        };
    }

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evaluations)).collect();

    let mut iteration = 0usize;
    let mut cycle_best = f64::INFINITY;
    let mut converged = false;
    while evaluations < max_evals {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if iteration % (dim + 1) == 0 {
            let best = values[0];
            let spread = values[dim] - best;
            if best.is_finite() && cycle_best - best < tol && spread < tol * (1.0 + best.abs()) {
                converged = true;
                break;
            }
            cycle_best = best;
        }
        iteration += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|x| x[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let reflected = along(-1.0);
        let fr = eval(&reflected, &mut evaluations);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = eval(&expanded, &mut evaluations);
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
            continue;
        }
        if fr < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[dim] {
            let x = along(-0.5);
            let v = eval(&x, &mut evaluations);
            (x, v)
        } else {
            let x = along(0.5);
            let v = eval(&x, &mut evaluations);
            (x, v)
        };
        if fc < values[dim].min(fr) {
            simplex[dim] = contracted;
            values[dim] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=dim {
            simplex[i] = best
                .iter()
                .zip(&simplex[i])
                .map(|(b, x)| b + 0.5 * (x - b))
                .collect();
            values[i] = eval(&simplex[i], &mut evaluations);
        }
    }

    let best = (0..=dim)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("simplex is non-empty");
    NelderMeadResult {
        x: simplex[best].clone(),
        value: values[best],
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic() {
        let res = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            0.5,
            1e-12,
            10_000,
        );
        assert!(res.converged);
        assert!((res.x[0] - 1.0).abs() < 1e-4 && (res.x[1] + 2.0).abs() < 1e-4);
    }

    #[test]
    fn rosenbrock() {
        let res = nelder_mead(
            |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[-1.2, 1.0],
            0.1,
            1e-14,
            20_000,
        );
        assert!(res.converged);
        assert!((res.x[0] - 1.0).abs() < 1e-3, "{:?}", res.x);
    }

    #[test]
    fn rejects_non_finite_regions() {
        let res = nelder_mead(
            |x| {
                if x[0] < 0.0 {
                    f64::NAN
                } else {
                    (x[0] - 0.3).powi(2)
                }
            },
            &[0.1],
            0.5,
            1e-12,
            5_000,
        );
        assert!((res.x[0] - 0.3).abs() < 1e-4);
    }

    #[test]
    fn evaluation_budget_is_respected() {
        let res = nelder_mead(|x| x.iter().map(|v| v * v).sum(), &[5.0; 4], 1.0, 0.0, 50);
        assert!(!res.converged);
        assert!(res.evaluations <= 50 + 5);
    }
}
