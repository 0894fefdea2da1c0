//! Independent nodal finite-difference solver used to cross-check the
//! spectral runs. Shares nothing with the Galerkin path except `φ`.

use nalgebra::{DMatrix, DVector};

use crate::eigenbasis::Order;
use crate::error::{Result, SolverError};
use crate::operators::{phi, Forcing, ProblemSpec, Reaction};
use crate::quadrature::Profile;

#[derive(Debug, Clone, PartialEq)]
pub struct FdTrajectory {
    /// Grid including both boundary nodes.
    pub x: Vec<f64>,
    pub times: Vec<f64>,
    /// Nodal values (boundary nodes included) at each time.
    pub values: Vec<Vec<f64>>,
}

impl FdTrajectory {
    /// Values at the stored time closest to `t`.
    pub fn at(&self, t: f64) -> (f64, &[f64]) {
        let i = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1 - t)
                    .abs()
                    .partial_cmp(&(b.1 - t).abs())
                    .expect("finite times")
            })
            .map(|(i, _)| i)
            .expect("at least one time");
        (self.times[i], &self.values[i])
    }
}

/// Centered differences in space (3-point `u''`; 5-point `u''''` with ghost
/// nodes `u_{-1} = u_1`, `u_{N+1} = u_{N-1}` enforcing `u' = 0`), IMEX Euler in time.
pub fn fd_oracle(spec: &ProblemSpec, grid_points: usize, tau: f64) -> Result<FdTrajectory> {
    spec.validate()?;
    if grid_points < 10 {
        return Err(SolverError::invalid(format!(
            "finite-difference grid needs at least 8 interior points, got {}",
            grid_points.saturating_sub(2)
        )));
    }
    if tau.is_nan() || tau <= 0.0 {
        return Err(SolverError::invalid("tau must be positive"));
    }
    let spec = spec.normalized();
    let len = spec.length;
    let interior = grid_points - 2;
    let h = len / (grid_points - 1) as f64;
    let x: Vec<f64> = (0..grid_points)
        .map(|i| len * i as f64 / (grid_points - 1) as f64)
        .collect();
    let xi = &x[1..grid_points - 1];

    // stiffness K so that du/dt = -K u - φ(u) + bnd + f
    let mut k = DMatrix::<f64>::zeros(interior, interior);
    let second = |k: &mut DMatrix<f64>, coef: f64| {
        let s = coef / (h * h);
        for i in 0..interior {
            k[(i, i)] += 2.0 * s;
            if i > 0 {
                k[(i, i - 1)] -= s;
            }
            if i + 1 < interior {
                k[(i, i + 1)] -= s;
            }
        }
    };
    match spec.order {
        Order::Laplacian => second(&mut k, 1.0),
        Order::Biharmonic => {
            second(&mut k, spec.beta);
            let s = spec.gamma / h.powi(4);
            let stencil = [1.0, -4.0, 6.0, -4.0, 1.0];
            for i in 0..interior {
                for (o, c) in stencil.iter().enumerate() {
                    // node index in the full grid is i + 1; neighbour is i + 1 + o - 2
                    let node = i as isize + o as isize - 1;
                    let target = if node == -1 {
                        // ghost u_{-1} = u_1
                        Some(0)
                    } else if node == grid_points as isize {
                        Some(interior - 1)
                    } else if node <= 0 || node >= grid_points as isize - 1 {
                        None
                    } else {
                        Some(node as usize - 1)
                    };
                    if let Some(j) = target {
                        k[(i, j)] += s * c;
                    }
                }
            }
        }
    }
    let mut boundary = DVector::<f64>::zeros(interior);
    boundary[0] += spec.bc_left / (h * h);
    boundary[interior - 1] += spec.bc_right / (h * h);

    let system = DMatrix::identity(interior, interior) + &k * tau;
    let chol = system.cholesky().ok_or_else(|| {
        SolverError::Internal("finite-difference system is not positive definite".into())
    })?;

    let mut u = DVector::from_iterator(
        interior,
        xi.iter().map(|&x| {
            spec.u0
                .value(x, len)
                .or_else(|| profile_by_coefficients(&spec, x))
                .unwrap_or(0.0)
        }),
    );

    let source = |t: f64| -> Option<DVector<f64>> {
        match &spec.forcing {
            Forcing::Zero => None,
            Forcing::Manufactured { reference, rate } => {
                let decay = (-rate * t).exp();
                Some(DVector::from_iterator(
                    interior,
                    xi.iter().map(|&x| {
                        let d = |k: u8| {
                            reference
                                .derivative(x, len, k)
                                .expect("validated reference")
                        };
                        let spatial = match spec.order {
                            Order::Laplacian => -d(2),
                            Order::Biharmonic => spec.gamma * d(4) - spec.beta * d(2),
                        };
                        let mut f = decay * (spatial - rate * d(0));
                        if spec.reaction == Reaction::Cubic {
                            f += phi(decay * d(0));
                        }
                        f
                    }),
                ))
            }
        }
    };

    let full = |u: &DVector<f64>| {
        let mut v = Vec::with_capacity(grid_points);
        v.push(spec.bc_left);
        v.extend(u.iter().copied());
        v.push(spec.bc_right);
        v
    };

    let final_time = spec.final_time;
    let steps = if final_time > 0.0 {
        ((final_time / tau) - 1e-9).ceil().max(1.0) as usize
    } else {
        0
    };
    let mut times = vec![0.0];
    let mut values = vec![full(&u)];
    let mut t = 0.0;
    let mut step_chol = None;
    for s in 0..steps {
        let t_next = if s + 1 == steps {
            final_time
        } else {
            (s + 1) as f64 * tau
        };
        let dt = t_next - t;
        let mut rhs = u.clone();
        if spec.reaction == Reaction::Cubic {
            rhs -= u.map(phi) * dt;
        }
        rhs += &boundary * dt;
        if let Some(f) = source(t_next) {
            rhs += f * dt;
        }
        u = if (dt - tau).abs() <= 1e-14 * tau {
            chol.solve(&rhs)
        } else {
            let c = step_chol.get_or_insert_with(|| {
                (DMatrix::identity(interior, interior) + &k * dt)
                    .cholesky()
                    .expect("SPD for any positive step")
            });
            c.solve(&rhs)
        };
        if u.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::BlowUp {
                t: t_next,
                max_coeff: u.amax(),
            });
        }
        t = t_next;
        times.push(t);
        values.push(full(&u));
    }
    Ok(FdTrajectory { x, times, values })
}

fn profile_by_coefficients(spec: &ProblemSpec, x: f64) -> Option<f64> {
    match &spec.u0 {
        Profile::Coefficients(c) => {
            let basis = match spec.order {
                Order::Laplacian => crate::eigenbasis::sine_basis(spec.length, c.len()).ok()?,
                Order::Biharmonic => crate::eigenbasis::beam_basis(spec.length, c.len()).ok()?,
            };
            let g = spec.lifting().map_or(0.0, |g| g.value(x));
            Some(
                c.iter()
                    .enumerate()
                    .map(|(j, a)| a * basis.value(j, x, 0))
                    .sum::<f64>()
                    + g,
            )
        }
        _ => None,
    }
}
