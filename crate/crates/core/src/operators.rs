//! Galerkin right-hand side: linear stiffness, gradient Gram matrix, the
//! pseudo-spectral cubic term, forcing, and the affine boundary lifting.

use nalgebra::{DMatrix, DVector};

use crate::eigenbasis::{Eigenbasis, Order};
use crate::error::{Result, SolverError};
use crate::quadrature::{Profile, QuadratureRule};

/// `φ(s) = s³ - s`.
#[inline]
pub fn phi(s: f64) -> f64 {
    s * s * s - s
}

/// `Φ(s) = (1 - s²)² / 4`, the antiderivative of `φ` with minimum 0 at ±1.
#[inline]
pub fn potential(s: f64) -> f64 {
    let q = 1.0 - s * s;
    0.25 * q * q
}

/// Whether the cubic reaction term is active. `Off` turns the problem into a
/// linear heat/beam equation, used by the validation scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reaction {
    #[default]
    Cubic,
    Off,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum Forcing {
    #[default]
    Zero,
    /// Source chosen so that `u(t, x) = e^{-rate t} reference(x)` is exact.
    Manufactured { reference: Profile, rate: f64 },
}

impl Forcing {
    pub fn is_zero(&self) -> bool {
        matches!(self, Forcing::Zero)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub order: Order,
    /// Coefficient of the fourth-order term (ignored when `m = 1`).
    pub gamma: f64,
    /// Coefficient of the `-u''` term (forced to 1 when `m = 1`).
    pub beta: f64,
    pub length: f64,
    pub final_time: f64,
    pub u0: Profile,
    pub bc_left: f64,
    pub bc_right: f64,
    pub forcing: Forcing,
    pub reaction: Reaction,
}

impl ProblemSpec {
    /// Homogeneous problem with unit coefficients and zero forcing.
    pub fn new(order: Order, length: f64, final_time: f64, u0: Profile) -> Self {
        ProblemSpec {
            order,
            gamma: 1.0,
            beta: 1.0,
            length,
            final_time,
            u0,
            bc_left: 0.0,
            bc_right: 0.0,
            forcing: Forcing::Zero,
            reaction: Reaction::Cubic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(SolverError::invalid(format!(
                "L must be positive, got {}",
                self.length
            )));
        }
        if !(self.final_time >= 0.0 && self.final_time.is_finite()) {
            return Err(SolverError::invalid(format!(
                "T must be non-negative, got {}",
                self.final_time
            )));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(SolverError::invalid(format!(
                "gamma must be >= 0, got {}",
                self.gamma
            )));
        }
        if self.order == Order::Biharmonic {
            if self.bc_left != 0.0 || self.bc_right != 0.0 {
                return Err(SolverError::invalid(
                    "clamped (m = 2) problems require zero boundary values",
                ));
            }
            if !(self.beta == 0.0 || self.beta == 1.0) {
                return Err(SolverError::invalid(format!(
                    "beta must be 0 or 1, got {}",
                    self.beta
                )));
            }
            if self.gamma == 0.0 && self.beta == 0.0 {
                return Err(SolverError::invalid(
                    "gamma = beta = 0 leaves no spatial operator",
                ));
            }
        }
        if let Forcing::Manufactured { reference, rate } = &self.forcing {
            if !matches!(reference, Profile::SineMode(_) | Profile::PolyBump) {
                return Err(SolverError::invalid(
                    "manufactured forcing supports sine_mode and poly_bump references only",
                ));
            }
            reference.validate(self.length)?;
            if !rate.is_finite() {
                return Err(SolverError::invalid(
                    "manufactured decay rate must be finite",
                ));
            }
            if self.lifting().is_some() {
                return Err(SolverError::invalid(
                    "manufactured forcing requires homogeneous boundary values",
                ));
            }
        }
        self.u0.validate(self.length)
    }

    /// Copy with the `m = 1` coefficient conventions applied.
    pub fn normalized(&self) -> Self {
        let mut s = self.clone();
        if s.order == Order::Laplacian {
            s.beta = 1.0;
        }
        s
    }

    pub fn lifting(&self) -> Option<Lifting> {
        if self.bc_left == 0.0 && self.bc_right == 0.0 {
            None
        } else {
            Some(Lifting {
                left: self.bc_left,
                right: self.bc_right,
                length: self.length,
            })
        }
    }
}

/// Affine function matching the Dirichlet values at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lifting {
    pub left: f64,
    pub right: f64,
    pub length: f64,
}

impl Lifting {
    pub fn value(&self, x: f64) -> f64 {
        self.left + (self.right - self.left) * x / self.length
    }

    pub fn slope(&self) -> f64 {
        (self.right - self.left) / self.length
    }
}

#[derive(Debug, Clone)]
pub struct AssembledOperators {
    order: Order,
    gamma: f64,
    beta: f64,
    length: f64,
    reaction: Reaction,
    forcing: Forcing,
    stiffness_diag: Vec<f64>,
    gram_grad: DMatrix<f64>,
    linear: DMatrix<f64>,
    lifting: Option<Lifting>,
    nodes: Vec<f64>,
    weights: DVector<f64>,
    lifting_at_nodes: Option<DVector<f64>>,
    // rows: quadrature nodes, columns: modes
    w0: DMatrix<f64>,
    w1: DMatrix<f64>,
    w2: DMatrix<f64>,
    // manufactured reference: (û, -r û + L û) at the nodes
    reference_at_nodes: Option<(DVector<f64>, DVector<f64>)>,
}

pub fn assemble(
    basis: &Eigenbasis,
    rule: &QuadratureRule,
    spec: &ProblemSpec,
) -> Result<AssembledOperators> {
    if basis.order() != spec.order {
        return Err(SolverError::invalid(format!(
            "basis is for m = {} but the problem has m = {}",
            basis.order().m(),
            spec.order.m()
        )));
    }
    if (basis.length() - spec.length).abs() > 1e-12 * spec.length
        || (rule.length() - spec.length).abs() > 1e-12 * spec.length
    {
        return Err(SolverError::invalid(
            "basis, quadrature and problem lengths differ",
        ));
    }
    spec.validate()?;
    let spec = spec.normalized();
    let n = basis.len();
    let nq = rule.nodes().len();
    let sample = |deriv: u8| DMatrix::from_fn(nq, n, |q, j| basis.value(j, rule.nodes()[q], deriv));
    let w0 = sample(0);
    let w1 = sample(1);
    let w2 = sample(2);
    let weights = DVector::from_column_slice(rule.weights());

    let mut weighted = w1.clone();
    for (q, mut row) in weighted.row_iter_mut().enumerate() {
        row *= weights[q];
    }
    let mut gram_grad = w1.transpose() * &weighted;
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (gram_grad[(i, j)] + gram_grad[(j, i)]);
            gram_grad[(i, j)] = avg;
            gram_grad[(j, i)] = avg;
        }
    }

    let (stiffness_diag, linear) = match spec.order {
        Order::Laplacian => {
            let d = basis.lambdas().to_vec();
            let a = DMatrix::from_diagonal(&DVector::from_column_slice(&d));
            (d, a)
        }
        Order::Biharmonic => {
            let d: Vec<f64> = basis.lambdas().iter().map(|l| spec.gamma * l).collect();
            let mut a = &gram_grad * spec.beta;
            for (i, v) in d.iter().enumerate() {
                a[(i, i)] += v;
            }
            (d, a)
        }
    };

    let lifting = spec.lifting();
    let lifting_at_nodes =
        lifting.map(|g| DVector::from_iterator(nq, rule.nodes().iter().map(|&x| g.value(x))));

    let reference_at_nodes = match &spec.forcing {
        Forcing::Zero => None,
        Forcing::Manufactured { reference, rate } => {
            let len = spec.length;
            let d = |x: f64, k: u8| {
                reference
                    .derivative(x, len, k)
                    .expect("validated reference")
            };
            let values = DVector::from_iterator(nq, rule.nodes().iter().map(|&x| d(x, 0)));
            let linear_part = DVector::from_iterator(
                nq,
                rule.nodes().iter().map(|&x| {
                    let spatial = match spec.order {
                        Order::Laplacian => -d(x, 2),
                        Order::Biharmonic => spec.gamma * d(x, 4) - spec.beta * d(x, 2),
                    };
                    spatial - rate * d(x, 0)
                }),
            );
            Some((values, linear_part))
        }
    };

    Ok(AssembledOperators {
        order: spec.order,
        gamma: spec.gamma,
        beta: spec.beta,
        length: spec.length,
        reaction: spec.reaction,
        forcing: spec.forcing.clone(),
        stiffness_diag,
        gram_grad,
        linear,
        lifting,
        nodes: rule.nodes().to_vec(),
        weights,
        lifting_at_nodes,
        w0,
        w1,
        w2,
        reference_at_nodes,
    })
}

impl AssembledOperators {
    pub fn n(&self) -> usize {
        self.w0.ncols()
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn reaction(&self) -> Reaction {
        self.reaction
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn stiffness_diag(&self) -> &[f64] {
        &self.stiffness_diag
    }

    /// `B_ij = (w_i', w_j')`.
    pub fn gram_grad(&self) -> &DMatrix<f64> {
        &self.gram_grad
    }

    /// The symmetric positive definite matrix `A` in `dc/dt = -A c - N(c) + F`.
    pub fn linear(&self) -> &DMatrix<f64> {
        &self.linear
    }

    pub fn lifting(&self) -> Option<Lifting> {
        self.lifting
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// `(u_n + g)^{(deriv)}` at the quadrature nodes.
    pub fn field_at_nodes(&self, c: &DVector<f64>, deriv: u8) -> DVector<f64> {
        match deriv {
            0 => {
                let mut u = &self.w0 * c;
                if let Some(g) = &self.lifting_at_nodes {
                    u += g;
                }
                u
            }
            1 => {
                let mut u = &self.w1 * c;
                if let Some(g) = self.lifting {
                    u.add_scalar_mut(g.slope());
                }
                u
            }
            _ => &self.w2 * c,
        }
    }

    /// `(v, w_j)` for `v` sampled at the nodes.
    pub fn project_nodal(&self, values: &DVector<f64>) -> DVector<f64> {
        self.w0.tr_mul(&values.component_mul(&self.weights))
    }

    /// `N_j = (φ(u_n + g), w_j)`, zero when the reaction is switched off.
    pub fn nonlinear_term(&self, c: &DVector<f64>) -> DVector<f64> {
        if self.reaction == Reaction::Off {
            return DVector::zeros(self.n());
        }
        let u = self.field_at_nodes(c, 0);
        self.project_nodal(&u.map(phi))
    }

    /// `(Φ(u_n + g), 1)`.
    pub fn potential_integral(&self, c: &DVector<f64>) -> f64 {
        self.field_at_nodes(c, 0).map(potential).dot(&self.weights)
    }

    /// Projected source `(f(t, ·), w_j)`.
    pub fn forcing_vector(&self, t: f64) -> DVector<f64> {
        match (&self.forcing, &self.reference_at_nodes) {
            (Forcing::Manufactured { rate, .. }, Some((values, linear_part))) => {
                let decay = (-rate * t).exp();
                let mut f = linear_part * decay;
                if self.reaction == Reaction::Cubic {
                    f += values.map(|v| phi(decay * v));
                }
                self.project_nodal(&f)
            }
            _ => DVector::zeros(self.n()),
        }
    }

    /// Exact manufactured solution at the nodes, if the forcing is manufactured.
    pub fn manufactured_at_nodes(&self, t: f64) -> Option<DVector<f64>> {
        match (&self.forcing, &self.reference_at_nodes) {
            (Forcing::Manufactured { rate, .. }, Some((values, _))) => {
                Some(values * (-rate * t).exp())
            }
            _ => None,
        }
    }

    /// Spatial operator energy `cᵀ A c` evaluated as `γ‖u''‖² + β‖u'‖²`
    /// (or `‖u'‖²` for `m = 1`) on the lifted field.
    pub fn vnorm_sq(&self, c: &DVector<f64>) -> f64 {
        let d1 = self.field_at_nodes(c, 1);
        let grad = d1.component_mul(&d1).dot(&self.weights);
        match self.order {
            Order::Laplacian => grad,
            Order::Biharmonic => {
                let d2 = self.field_at_nodes(c, 2);
                self.gamma * d2.component_mul(&d2).dot(&self.weights) + self.beta * grad
            }
        }
    }

    /// Copy of these operators with a given lifting; used to compare the
    /// lifted and unlifted code paths.
    #[doc(hidden)]
    pub fn with_lifting(&self, lifting: Option<Lifting>) -> Self {
        let mut out = self.clone();
        out.lifting = lifting;
        out.lifting_at_nodes = lifting.map(|g| {
            DVector::from_iterator(self.nodes.len(), self.nodes.iter().map(|&x| g.value(x)))
        });
        out
    }
}
