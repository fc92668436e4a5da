//! A fully specified perturbed Hammerstein problem and the constants derived from it.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::criteria::Nonlinearity;
use crate::error::{Error, Result};
use crate::greens::{ShiftSign, ShiftedKernel, SignClass};
use crate::kernel::{row_integral, signed_row_integral, Kernel, Weight, T_GRID};
use crate::kernel_s::AssembledKernel;
use crate::measures::BoundaryData;
use crate::quadrature::Integrator;
use crate::report::opt_float;
use crate::scalar::{lit, to_f64, uniform_grid, Real};
use crate::search::{grid_extremum, Extremum, Goal};
use crate::spectral::{principal_value, NystromOperator, OperatorKind, SpectralEstimate};

/// Numerical settings shared by the spectral estimates and the solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    pub nodes: usize,
    pub tol: f64,
    pub damping: f64,
    pub max_iter: usize,
    /// Anderson mixing depth; `None` for plain damped iteration.
    pub anderson: Option<usize>,
    pub starts: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            nodes: 200,
            tol: 1e-10,
            damping: 0.5,
            max_iter: 20_000,
            anderson: None,
            starts: 20,
        }
    }
}

/// `u(t) = γ(t)α[u] + δ(t)β[u] + ∫ k(t,s) g(s) f(s,u(s)) ds` on `[0,1]`, with
/// `k` the Green's function of the shifted Neumann problem and the cone
/// localized on `[a, b]`.
#[derive(Clone, Debug)]
pub struct ProblemSpec<T: Real> {
    pub sign: ShiftSign,
    pub omega: T,
    pub g: Weight<T>,
    pub f: Nonlinearity<T>,
    pub boundary: BoundaryData<T>,
    pub a: T,
    pub b: T,
    pub settings: Settings,
}

impl<T: Real> ProblemSpec<T> {
    pub fn new(sign: ShiftSign, omega: T, g: Weight<T>, f: Nonlinearity<T>, a: T, b: T) -> Self {
        Self {
            sign,
            omega,
            g,
            f,
            boundary: BoundaryData::trivial(),
            a,
            b,
            settings: Settings::default(),
        }
    }

    pub fn with_boundary(mut self, bd: BoundaryData<T>) -> Self {
        self.boundary = bd;
        self
    }

    pub fn with_settings(mut self, s: Settings) -> Self {
        self.settings = s;
        self
    }

    pub fn with_f(mut self, f: Nonlinearity<T>) -> Self {
        self.f = f;
        self
    }

    pub fn kernel(&self) -> Result<ShiftedKernel<T>> {
        ShiftedKernel::new(self.sign, self.omega)
    }

    pub fn analyze(&self) -> Result<Analysis<T>> {
        Analysis::new(self.clone())
    }
}

/// Constants of a problem in `f64`, ready for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsBundle {
    pub epsilon: i32,
    pub omega: f64,
    pub a: f64,
    pub b: f64,
    pub sign_class: SignClass,
    /// `sup_s Φ(s)`.
    pub phi_sup: f64,
    /// `c(a,b)` of the Green's function.
    pub c: f64,
    #[serde(with = "opt_float")]
    pub c2: Option<f64>,
    #[serde(with = "opt_float")]
    pub c3: Option<f64>,
    /// `min{c, c₂, c₃}`, the constant of the cone.
    pub cone_c: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    #[serde(rename = "m_S")]
    pub m_s: f64,
    #[serde(rename = "M_S")]
    pub big_m_s: f64,
    #[serde(with = "opt_float")]
    pub c_tilde: Option<f64>,
    #[serde(rename = "D")]
    pub d: f64,
    pub alpha_gamma: f64,
    pub alpha_delta: f64,
    pub beta_gamma: f64,
    pub beta_delta: f64,
    pub gamma_norm: f64,
    pub delta_norm: f64,
    /// `∫_0^1 K_A g`, `∫_0^1 K_B g`, `∫_a^b K_A g`, `∫_a^b K_B g`.
    pub ka_integral: f64,
    pub kb_integral: f64,
    pub ka_integral_ab: f64,
    pub kb_integral_ab: f64,
}

/// A validated problem with its constants; spectral data and sup/inf scans
/// are computed on first use and cached.
pub struct Analysis<T: Real> {
    spec: ProblemSpec<T>,
    kernel: ShiftedKernel<T>,
    q: Integrator<T>,
    ak: AssembledKernel<T>,
    c1: T,
    m: T,
    big_m: T,
    m_s: T,
    big_m_s: T,
    k_integrals: [T; 4],
    spectral: [OnceLock<Result<SpectralEstimate<T>>>; 3],
    c_tilde: OnceLock<Result<T>>,
    i1_sup: OnceLock<Result<Extremum<T>>>,
    i0_inf: OnceLock<Result<Extremum<T>>>,
}

impl<T: Real> std::fmt::Debug for Analysis<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Analysis")
            .field("omega", &self.spec.omega)
            .field("a", &self.spec.a)
            .field("b", &self.spec.b)
            .field("m", &self.m)
            .field("M", &self.big_m)
            .finish()
    }
}

impl<T: Real> Analysis<T> {
    pub fn new(spec: ProblemSpec<T>) -> Result<Self> {
        let (a, b) = (spec.a, spec.b);
        if !(T::zero() <= a && a < b && b <= T::one()) {
            return Err(Error::InvalidInput(format!("[{a}, {b}] is not a subinterval of [0, 1]")));
        }
        spec.g.check_nonnegative()?;
        let q = Integrator::default();
        let kernel = spec.kernel()?;
        let c1 = kernel.c_of_interval(a, b)?;
        let m = kernel.m_constant(&spec.g, &q)?;
        let big_m = kernel.m_ab_constant(a, b, &spec.g, &q)?;
        let ak = AssembledKernel::assemble(Arc::new(kernel), spec.boundary.clone(), c1, a, b, &q)?;
        let (m_s, big_m_s) = ak.ms_constants(&spec.g, a, b, &q)?;
        let integral = |which: bool, lo: T, hi: T| -> Result<T> {
            let kf = if which { ak.ka() } else { ak.kb() };
            if kf.is_zero() {
                return Ok(T::zero());
            }
            q.integrate_split(&|s| kf.eval(s) * spec.g.eval(s), lo, hi, &kf.breaks())
        };
        let k_integrals = [
            integral(true, T::zero(), T::one())?,
            integral(false, T::zero(), T::one())?,
            integral(true, a, b)?,
            integral(false, a, b)?,
        ];
        Ok(Self {
            spec,
            kernel,
            q,
            ak,
            c1,
            m,
            big_m,
            m_s,
            big_m_s,
            k_integrals,
            spectral: Default::default(),
            c_tilde: OnceLock::new(),
            i1_sup: OnceLock::new(),
            i0_inf: OnceLock::new(),
        })
    }

    pub fn spec(&self) -> &ProblemSpec<T> {
        &self.spec
    }

    pub fn kernel(&self) -> &ShiftedKernel<T> {
        &self.kernel
    }

    pub fn assembled(&self) -> &AssembledKernel<T> {
        &self.ak
    }

    pub fn integrator(&self) -> &Integrator<T> {
        &self.q
    }

    pub fn f(&self) -> &Nonlinearity<T> {
        &self.spec.f
    }

    pub fn g(&self) -> &Weight<T> {
        &self.spec.g
    }

    pub fn interval(&self) -> (T, T) {
        (self.spec.a, self.spec.b)
    }

    /// `c(a,b)` of the Green's function.
    pub fn c1(&self) -> T {
        self.c1
    }

    /// Constant of the cone, `min{c(a,b), c₂, c₃}`.
    pub fn cone_c(&self) -> T {
        self.ak.cone_c()
    }

    pub fn m(&self) -> T {
        self.m
    }

    pub fn big_m(&self) -> T {
        self.big_m
    }

    pub fn m_s(&self) -> T {
        self.m_s
    }

    pub fn big_m_s(&self) -> T {
        self.big_m_s
    }

    /// `(∫_0^1 K_A g, ∫_0^1 K_B g)`.
    pub fn k_integrals_full(&self) -> (T, T) {
        (self.k_integrals[0], self.k_integrals[1])
    }

    /// `(∫_a^b K_A g, ∫_a^b K_B g)`.
    pub fn k_integrals_ab(&self) -> (T, T) {
        (self.k_integrals[2], self.k_integrals[3])
    }

    /// True when `α` and `β` are positive measures.
    pub fn measures_positive(&self) -> bool {
        self.spec.boundary.alpha.is_positive() && self.spec.boundary.beta.is_positive()
    }

    pub fn c_tilde(&self) -> Result<T> {
        self.c_tilde
            .get_or_init(|| self.ak.c_tilde(&self.spec.g, self.spec.a, self.spec.b, &self.q))
            .clone()
    }

    /// Principal characteristic value of `L`, `L̃` or `L₊` with its refinement gap.
    pub fn spectral(&self, kind: OperatorKind) -> Result<SpectralEstimate<T>> {
        let slot = match kind {
            OperatorKind::L => 0,
            OperatorKind::Ltilde => 1,
            OperatorKind::Lplus => 2,
        };
        self.spectral[slot]
            .get_or_init(|| {
                let op = self.operator(kind)?;
                principal_value(&op, lit::<T>(1e-13).max(T::epsilon() * lit(16.0)))
            })
            .clone()
    }

    pub fn operator(&self, kind: OperatorKind) -> Result<NystromOperator<T>> {
        crate::spectral::discretize(kind, &self.ak, &self.spec.g, self.spec.a, self.spec.b, self.spec.settings.nodes)
    }

    /// Kernel part of the coupled index-one expression at `t`.
    pub fn index_one_row(&self, t: T) -> Result<T> {
        let bd = &self.spec.boundary;
        let sc = self.ak.scalars();
        let (xa, xb) = sc.gamma_coefficients();
        let (ya, yb) = sc.delta_coefficients();
        let (ka, kb) = self.k_integrals_full();
        let parts = signed_row_integral(&self.kernel, t, &self.spec.g, T::zero(), T::one(), &self.q)?;
        Ok(bd.gamma.eval(t).abs() * (xa * ka + xb * kb) + bd.delta.eval(t).abs() * (ya * ka + yb * kb) + parts.larger())
    }

    /// Kernel part of the coupled index-zero expression at `t ∈ [a, b]`.
    pub fn index_zero_row(&self, t: T) -> Result<T> {
        let bd = &self.spec.boundary;
        let sc = self.ak.scalars();
        let (xa, xb) = sc.gamma_coefficients();
        let (ya, yb) = sc.delta_coefficients();
        let (ka, kb) = self.k_integrals_ab();
        let base = row_integral(&self.kernel, t, &self.spec.g, self.spec.a, self.spec.b, &self.q)?;
        Ok(bd.gamma.eval(t) * (xa * ka + xb * kb) + bd.delta.eval(t) * (ya * ka + yb * kb) + base)
    }

    /// `sup_t` of [`Analysis::index_one_row`] over a 2000-point grid, refined.
    pub fn index_one_sup(&self) -> Result<Extremum<T>> {
        self.i1_sup
            .get_or_init(|| grid_extremum(|t| self.index_one_row(t), T::zero(), T::one(), T_GRID, Goal::Max))
            .clone()
    }

    /// `inf_{[a,b]}` of [`Analysis::index_zero_row`] over a 2000-point grid, refined.
    pub fn index_zero_inf(&self) -> Result<Extremum<T>> {
        self.i0_inf
            .get_or_init(|| grid_extremum(|t| self.index_zero_row(t), self.spec.a, self.spec.b, T_GRID, Goal::Min))
            .clone()
    }

    /// Decoupled upper bound of the index-one expression using `‖γ‖`, `‖δ‖`, `1/m`.
    pub fn index_one_simplified(&self) -> T {
        let sc = self.ak.scalars();
        let (xa, xb) = sc.gamma_coefficients();
        let (ya, yb) = sc.delta_coefficients();
        let (ka, kb) = self.k_integrals_full();
        self.ak.gamma_norm() * (xa * ka + xb * kb) + self.ak.delta_norm() * (ya * ka + yb * kb) + T::one() / self.m
    }

    /// Lower bound of the index-zero expression using `c₂‖γ‖`, `c₃‖δ‖`, `1/M(a,b)`.
    pub fn index_zero_simplified(&self) -> T {
        let sc = self.ak.scalars();
        let (xa, xb) = sc.gamma_coefficients();
        let (ya, yb) = sc.delta_coefficients();
        let (ka, kb) = self.k_integrals_ab();
        let g = self.ak.c2().unwrap_or(T::zero()) * self.ak.gamma_norm();
        let d = self.ak.c3().unwrap_or(T::zero()) * self.ak.delta_norm();
        g * (xa * ka + xb * kb) + d * (ya * ka + yb * kb) + T::one() / self.big_m
    }

    pub fn constants(&self) -> ConstantsBundle {
        let sc = self.ak.scalars().to_f64();
        let phi_sup = uniform_grid(T::zero(), T::one(), T_GRID + 1)
            .into_iter()
            .filter_map(|s| self.kernel.phi(s).ok())
            .fold(T::zero(), T::max);
        let (ka, kb) = self.k_integrals_full();
        let (ka_ab, kb_ab) = self.k_integrals_ab();
        ConstantsBundle {
            epsilon: self.spec.sign.epsilon(),
            omega: to_f64(self.spec.omega),
            a: to_f64(self.spec.a),
            b: to_f64(self.spec.b),
            sign_class: self.kernel.sign_class(),
            phi_sup: to_f64(phi_sup),
            c: to_f64(self.c1),
            c2: self.ak.c2().map(to_f64),
            c3: self.ak.c3().map(to_f64),
            cone_c: to_f64(self.cone_c()),
            m: to_f64(self.m),
            big_m: to_f64(self.big_m),
            m_s: to_f64(self.m_s),
            big_m_s: to_f64(self.big_m_s),
            c_tilde: self.c_tilde().ok().map(to_f64),
            d: sc.d,
            alpha_gamma: sc.alpha_gamma,
            alpha_delta: sc.alpha_delta,
            beta_gamma: sc.beta_gamma,
            beta_delta: sc.beta_delta,
            gamma_norm: to_f64(self.ak.gamma_norm()),
            delta_norm: to_f64(self.ak.delta_norm()),
            ka_integral: to_f64(ka),
            kb_integral: to_f64(kb),
            ka_integral_ab: to_f64(ka_ab),
            kb_integral_ab: to_f64(kb_ab),
        }
    }

    /// `k(t,s)` of the assembled kernel.
    pub fn kernel_value(&self, t: T, s: T) -> T {
        self.ak.eval(t, s)
    }
}
