//! Reduced density laws `g(y)` with `rho(r) = r^{2l} g(y(r))`.
//!
//! For a kinetic ansatz `f = Phi(E0 - E) L^l`,
//! `g(y) = c_l * int_0^y Phi(eta) (y - eta)^{l + 1/2} d eta`.
//! Fluids enter through `g = Q^{-1}` with `Q(rho) = int_0^rho P'(s)/s ds`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use statrs::function::beta::beta;

use crate::error::{domain, Error, Result};
use crate::numeric::fit::{power_fit, PowerFit};
use crate::numeric::pchip::{read_two_columns, MonotoneCubic, TableError};
use crate::numeric::quad::{gauss_kronrod, tanh_sinh};
use crate::numeric::roots::newton_bisect;

/// Relative accuracy of `g` computed by quadrature.
pub const G_REL_TOL: f64 = 1e-11;
/// `g_maxwellian` refuses arguments above this value.
pub const MAXWELLIAN_Y_MAX: f64 = 700.0;

/// `c_l = 2^{l+3/2} pi B(1/2, l+1)`, the velocity-space volume factor.
pub fn c_l(l: f64) -> Result<f64> {
    if !(l > -0.5) || !l.is_finite() {
        return Err(domain(format!("l must be > -1/2, got {l}")));
    }
    Ok(2f64.powf(l + 1.5) * PI * beta(0.5, l + 1.0))
}

fn check_polytrope(k: f64, l: f64) -> Result<()> {
    if !(k > -1.0) || !k.is_finite() {
        return Err(domain(format!("polytrope: k must be > -1, got {k}")));
    }
    if !(l > -0.5) || !l.is_finite() {
        return Err(domain(format!("polytrope: l must be > -1/2, got {l}")));
    }
    Ok(())
}

/// `g` for `Phi(eta) = eta_+^k`: `c_l B(k+1, l+3/2) y^{k+l+3/2}`.
pub fn g_polytrope(k: f64, l: f64, y: f64) -> Result<f64> {
    check_polytrope(k, l)?;
    if y.is_nan() {
        return Err(domain("g: y is NaN"));
    }
    if y <= 0.0 {
        return Ok(0.0);
    }
    Ok(c_l(l)? * beta(k + 1.0, l + 1.5) * y.powf(k + l + 1.5))
}

/// Isothermal law `(2 pi)^{3/2} e^y` (no cutoff).
pub fn g_maxwellian(y: f64) -> Result<f64> {
    if y.is_nan() {
        return Err(domain("g: y is NaN"));
    }
    if y > MAXWELLIAN_Y_MAX {
        return Err(domain(format!(
            "maxwellian: y = {y} exceeds {MAXWELLIAN_Y_MAX} (overflow)"
        )));
    }
    Ok((2.0 * PI).powf(1.5) * y.exp())
}

/// Sampled `Phi` with declared behaviour `Phi(eta) ~ eta^kappa` at 0.
///
/// The ratio `Phi / eta^kappa` is interpolated monotonically, so a pure
/// power law with `kappa = k` is reproduced exactly. Below the first sample
/// the ratio is held constant. Above the last sample `Phi` is 0 if the last
/// sample is 0, otherwise the ratio is again held constant.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiTable {
    ratio: MonotoneCubic,
    kappa: f64,
    compact: bool,
    source: String,
}

impl PhiTable {
    pub fn new(eta: Vec<f64>, phi: Vec<f64>, kappa: f64, source: &str) -> Result<Self> {
        if !(kappa > -1.0) || !kappa.is_finite() {
            return Err(domain(format!("phi table: kappa must be > -1, got {kappa}")));
        }
        if eta.len() != phi.len() {
            return Err(domain("phi table: column lengths differ"));
        }
        for (i, (&e, &p)) in eta.iter().zip(&phi).enumerate() {
            if !e.is_finite() || !p.is_finite() {
                return Err(TableError::NonFinite { row: i }.into());
            }
            if e < 0.0 {
                return Err(domain(format!("phi table row {i}: eta = {e} < 0")));
            }
            if p < 0.0 {
                return Err(domain(format!("phi table row {i}: phi = {p} < 0")));
            }
        }
        // eta = 0 carries no information about the ratio unless kappa = 0
        let (eta, phi): (Vec<f64>, Vec<f64>) = eta
            .into_iter()
            .zip(phi)
            .filter(|&(e, _)| e > 0.0 || kappa == 0.0)
            .unzip();
        if eta.len() < 2 {
            return Err(TableError::TooShort {
                min: 2,
                got: eta.len(),
            }
            .into());
        }
        if phi[0] <= 0.0 {
            return Err(domain(
                "phi table: Phi must be positive on an interval [0, eta_1] (first sample is 0)",
            ));
        }
        let compact = *phi.last().expect("non-empty") == 0.0;
        let ratio: Vec<f64> = eta
            .iter()
            .zip(&phi)
            .map(|(&e, &p)| if e == 0.0 { p } else { p / e.powf(kappa) })
            .collect();
        Ok(Self {
            ratio: MonotoneCubic::new(eta, ratio)?,
            kappa,
            compact,
            source: source.to_string(),
        })
    }

    /// Samples `eta^k` on `n` log-spaced points of `[eta_lo, eta_hi]`.
    pub fn from_power(k: f64, eta_lo: f64, eta_hi: f64, n: usize) -> Result<Self> {
        let step = (eta_hi / eta_lo).ln() / (n.max(2) - 1) as f64;
        let eta: Vec<f64> = (0..n.max(2)).map(|i| eta_lo * (step * i as f64).exp()).collect();
        let phi = eta.iter().map(|e| e.powf(k)).collect();
        Self::new(eta, phi, k, &format!("eta^{k}"))
    }

    pub fn load(path: &Path, kappa: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let (eta, phi) =
            read_two_columns(&text).map_err(|e| domain(format!("{}: {e}", path.display())))?;
        Self::new(eta, phi, kappa, &path.display().to_string())
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// End of the support if the table is compactly supported.
    pub fn support_end(&self) -> Option<f64> {
        self.compact.then(|| self.ratio.x_max())
    }

    pub fn eval(&self, eta: f64) -> f64 {
        if eta <= 0.0 {
            return if eta == 0.0 && self.kappa == 0.0 {
                self.ratio.values()[0]
            } else {
                0.0
            };
        }
        let q = if eta < self.ratio.x_min() {
            self.ratio.values()[0]
        } else if eta > self.ratio.x_max() {
            if self.compact {
                return 0.0;
            }
            *self.ratio.values().last().expect("non-empty")
        } else {
            self.ratio.eval(eta)
        };
        q * eta.powf(self.kappa)
    }
}

/// `c_l int_0^y Phi(eta) (y - eta)^{l+1/2} d eta` by piecewise quadrature.
///
/// The range is split at the table knots. Pieces touching `0` or `y` use
/// tanh-sinh, which absorbs the `eta^kappa` and `(y - eta)^{l+1/2}` endpoint
/// behaviour; interior pieces use Gauss-Kronrod.
pub fn g_from_phi(phi: &PhiTable, l: f64, y: f64) -> Result<f64> {
    if !(l > -0.5) {
        return Err(domain(format!("l must be > -1/2, got {l}")));
    }
    if y.is_nan() {
        return Err(domain("g: y is NaN"));
    }
    if y <= 0.0 {
        return Ok(0.0);
    }
    let p = l + 0.5;
    let upper = phi.support_end().map_or(y, |end| end.min(y));
    let mut cuts = vec![0.0];
    cuts.extend(phi.ratio.knots().iter().copied().filter(|&e| e > 0.0 && e < upper));
    cuts.push(upper);
    let abs_tol = 1e-300;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let q = if a == 0.0 || b == y {
            tanh_sinh(
                |eta, _, db| {
                    let dist = if b == y { db } else { y - eta };
                    phi.eval(eta) * dist.powf(p)
                },
                a,
                b,
                abs_tol,
                G_REL_TOL,
            )
        } else {
            gauss_kronrod(|eta| phi.eval(eta) * (y - eta).powf(p), a, b, abs_tol, G_REL_TOL, 200)
        };
        total += q
            .map_err(|e| domain(format!("g_from_phi: quadrature failed at y = {y:e}: {e}")))?
            .value;
    }
    Ok(c_l(l)? * total)
}

/// Pressure law of a barotropic fluid.
#[derive(Clone)]
pub struct FluidEos {
    name: String,
    pressure_prime: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    n_growth: Option<f64>,
    closed_form: Option<(f64, f64)>,
    q_table: QTable,
}

impl fmt::Debug for FluidEos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FluidEos")
            .field("name", &self.name)
            .field("n_growth", &self.n_growth)
            .finish_non_exhaustive()
    }
}

/// `Q` on a log grid of `rho`, cumulative from the analytic head below the
/// first sample.
#[derive(Debug, Clone)]
struct QTable {
    ln_rho: Vec<f64>,
    q: Vec<f64>,
    /// Local exponent of `P'` at the smallest density.
    head_exponent: f64,
}

const Q_LN_RHO_MIN: f64 = -690.0;
const Q_LN_RHO_MAX: f64 = 690.0;
const Q_PER_DECADE: usize = 8;

impl FluidEos {
    /// `P(rho) = K rho^{1 + 1/n}`.
    pub fn polytropic(n: f64, k: f64) -> Result<Self> {
        if !(n > 0.0) || !n.is_finite() {
            return Err(domain(format!("polytropic fluid: n must be > 0, got {n}")));
        }
        if !(k > 0.0) || !k.is_finite() {
            return Err(domain(format!("polytropic fluid: K must be > 0, got {k}")));
        }
        let coeff = k * (1.0 + 1.0 / n);
        let mut eos = Self::new(
            &format!("polytropic(n={n},K={k})"),
            Arc::new(move |rho: f64| coeff * rho.powf(1.0 / n)),
            Some(n),
        )?;
        eos.closed_form = Some((n, k));
        Ok(eos)
    }

    /// Generic law given through `P'`. `Q` is tabulated once here.
    pub fn new(
        name: &str,
        pressure_prime: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        n_growth: Option<f64>,
    ) -> Result<Self> {
        let q_table = QTable::build(&*pressure_prime)?;
        Ok(Self {
            name: name.to_string(),
            pressure_prime,
            n_growth,
            closed_form: None,
            q_table,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_growth(&self) -> Option<f64> {
        self.n_growth
    }

    pub fn pressure_prime(&self, rho: f64) -> f64 {
        (self.pressure_prime)(rho)
    }

    /// Drops the analytic shortcut so the tabulated inversion is used.
    pub fn without_closed_form(mut self) -> Self {
        self.closed_form = None;
        self
    }

    /// `Q(rho) = int_0^rho P'(s) / s ds`.
    pub fn q(&self, rho: f64) -> Result<f64> {
        if rho.is_nan() || rho < 0.0 {
            return Err(domain(format!("Q: rho must be >= 0, got {rho}")));
        }
        if rho == 0.0 {
            return Ok(0.0);
        }
        let t = &self.q_table;
        let x = rho.ln();
        if x <= t.ln_rho[0] {
            return Ok(self.pressure_prime(rho) / t.head_exponent);
        }
        if x > *t.ln_rho.last().expect("non-empty") {
            return Err(domain(format!("Q: rho = {rho:e} beyond the tabulated range")));
        }
        let i = t.ln_rho.partition_point(|&v| v <= x) - 1;
        let pp = &*self.pressure_prime;
        let q = gauss_kronrod(|s| pp(s.exp()), t.ln_rho[i], x, 0.0, 1e-14, 100)?;
        Ok(t.q[i] + q.value)
    }

    /// `Q^{-1}(y)` for `y > 0`, 0 otherwise.
    pub fn g(&self, y: f64) -> Result<f64> {
        if y.is_nan() {
            return Err(domain("g: y is NaN"));
        }
        if y <= 0.0 {
            return Ok(0.0);
        }
        if let Some((n, k)) = self.closed_form {
            return Ok((y / (k * (n + 1.0))).powf(n));
        }
        let t = &self.q_table;
        if y <= t.q[0] {
            // invert the local power law of the head
            let rho0 = t.ln_rho[0].exp();
            return Ok(rho0 * (y / t.q[0]).powf(1.0 / t.head_exponent));
        }
        if y > *t.q.last().expect("non-empty") {
            return Err(domain(format!("fluid: y = {y:e} beyond the tabulated range of Q")));
        }
        let i = t.q.partition_point(|&v| v < y);
        let (lo, hi) = (t.ln_rho[i - 1], t.ln_rho[i]);
        let pp = &*self.pressure_prime;
        let base = t.q[i - 1];
        let x = newton_bisect(
            |x| {
                let part = gauss_kronrod(|s| pp(s.exp()), lo, x, 0.0, 1e-14, 100)
                    .map(|q| q.value)
                    .unwrap_or(f64::NAN);
                (base + part - y, pp(x.exp()))
            },
            lo,
            hi,
            None,
            1e-15,
            1e-12 * y.max(1.0) * 1e-2,
            200,
        )?;
        Ok(x.exp())
    }
}

impl QTable {
    fn build(pp: &dyn Fn(f64) -> f64) -> Result<Self> {
        let step = std::f64::consts::LN_10 / Q_PER_DECADE as f64;
        let n = ((Q_LN_RHO_MAX - Q_LN_RHO_MIN) / step).floor() as usize + 1;
        let ln_rho: Vec<f64> = (0..n).map(|i| Q_LN_RHO_MIN + step * i as f64).collect();
        for &x in &ln_rho {
            let v = pp(x.exp());
            if !(v > 0.0) || !v.is_finite() {
                return Err(domain(format!(
                    "fluid: P'(rho) must be positive and finite, got {v:e} at rho = {:e}",
                    x.exp()
                )));
            }
        }
        // Q is an integral of P' in ln rho; near 0 the integrand must decay
        // geometrically per decade for the improper integral to converge.
        let decade = |x0: f64| -> Result<f64> {
            Ok(gauss_kronrod(|s| pp(s.exp()), x0, x0 + std::f64::consts::LN_10, 0.0, 1e-13, 100)?.value)
        };
        let d0 = decade(ln_rho[0])?;
        let d1 = decade(ln_rho[0] + std::f64::consts::LN_10)?;
        if d0 / d1 >= 0.98 {
            return Err(domain(
                "fluid: int_0^1 P'(s)/s ds diverges (P' does not vanish fast enough at 0)",
            ));
        }
        // local exponent p of P' ~ rho^p: successive decade integrals differ by 10^p
        let p = (d1 / d0).log10();
        let mut q = Vec::with_capacity(n);
        q.push(pp(ln_rho[0].exp()) / p);
        for w in ln_rho.windows(2) {
            let seg = gauss_kronrod(|s| pp(s.exp()), w[0], w[1], 0.0, 1e-14, 100)?.value;
            q.push(q.last().expect("non-empty") + seg);
        }
        let top = decade(ln_rho[n - 1] - std::f64::consts::LN_10)?;
        let below = decade(ln_rho[n - 1] - 2.0 * std::f64::consts::LN_10)?;
        if top / below < 0.98 {
            return Err(domain(
                "fluid: int_1^inf P'(s)/s ds converges, so Q is bounded and g undefined for large y",
            ));
        }
        Ok(Self {
            ln_rho,
            q,
            head_exponent: p,
        })
    }
}

/// How `y` relates to the potential: `y = E0 - U`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffConvention {
    /// `E0 = 0`, so `U = -y`.
    #[default]
    E0Zero,
    /// `E0 = y_inf`, so `U -> 0` at infinity. Only defined for `alpha < 1`.
    E0AtInfinity,
}

impl CutoffConvention {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "e0-zero" => Some(Self::E0Zero),
            "e0-at-infinity" => Some(Self::E0AtInfinity),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::E0Zero => "e0-zero",
            Self::E0AtInfinity => "e0-at-infinity",
        }
    }
}

#[derive(Debug, Clone)]
pub enum AnsatzKind {
    Polytrope { k: f64, l: f64 },
    PhiTable { table: Arc<PhiTable>, l: f64 },
    Maxwellian,
    Fluid(Arc<FluidEos>),
}

/// A matter model, reduced to its density law `g`.
#[derive(Debug, Clone)]
pub struct AnsatzModel {
    kind: AnsatzKind,
    convention: CutoffConvention,
}

impl AnsatzModel {
    pub fn polytrope(k: f64, l: f64) -> Result<Self> {
        check_polytrope(k, l)?;
        Ok(Self::from_kind(AnsatzKind::Polytrope { k, l }))
    }

    pub fn phi_table(table: PhiTable, l: f64) -> Result<Self> {
        if !(l > -0.5) || !l.is_finite() {
            return Err(domain(format!("phi table: l must be > -1/2, got {l}")));
        }
        Ok(Self::from_kind(AnsatzKind::PhiTable {
            table: Arc::new(table),
            l,
        }))
    }

    pub fn maxwellian() -> Self {
        Self::from_kind(AnsatzKind::Maxwellian)
    }

    pub fn fluid(eos: FluidEos) -> Self {
        Self::from_kind(AnsatzKind::Fluid(Arc::new(eos)))
    }

    fn from_kind(kind: AnsatzKind) -> Self {
        Self {
            kind,
            convention: CutoffConvention::default(),
        }
    }

    pub fn with_convention(mut self, convention: CutoffConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn kind(&self) -> &AnsatzKind {
        &self.kind
    }

    pub fn convention(&self) -> CutoffConvention {
        self.convention
    }

    /// Angular-momentum exponent (0 for isotropic models and fluids).
    pub fn l(&self) -> f64 {
        match self.kind {
            AnsatzKind::Polytrope { l, .. } | AnsatzKind::PhiTable { l, .. } => l,
            AnsatzKind::Maxwellian | AnsatzKind::Fluid(_) => 0.0,
        }
    }

    /// Whether `g` vanishes for `y <= 0` (everything except the Maxwellian).
    pub fn has_cutoff(&self) -> bool {
        !matches!(self.kind, AnsatzKind::Maxwellian)
    }

    pub fn is_kinetic(&self) -> bool {
        !matches!(self.kind, AnsatzKind::Fluid(_))
    }

    /// `Phi(eta)` of a kinetic model, `e^{eta}` for the Maxwellian.
    pub fn phi(&self, eta: f64) -> Option<f64> {
        match &self.kind {
            AnsatzKind::Polytrope { k, .. } => Some(if eta > 0.0 { eta.powf(*k) } else { 0.0 }),
            AnsatzKind::PhiTable { table, .. } => Some(table.eval(eta)),
            AnsatzKind::Maxwellian => Some(eta.exp()),
            AnsatzKind::Fluid(_) => None,
        }
    }

    pub fn g(&self, y: f64) -> Result<f64> {
        match &self.kind {
            AnsatzKind::Polytrope { k, l } => g_polytrope(*k, *l, y),
            AnsatzKind::PhiTable { table, l } => g_from_phi(table, *l, y),
            AnsatzKind::Maxwellian => g_maxwellian(y),
            AnsatzKind::Fluid(eos) => eos.g(y),
        }
    }

    /// Whether `g` is expensive enough to be worth memoizing.
    fn memoize(&self) -> bool {
        match &self.kind {
            AnsatzKind::PhiTable { .. } => true,
            AnsatzKind::Fluid(eos) => eos.closed_form.is_none(),
            _ => false,
        }
    }

    /// A `g` evaluator with a private memo table, for one integration.
    pub fn evaluator(&self) -> GEvaluator<'_> {
        GEvaluator {
            ansatz: self,
            memo: self.memoize().then(HashMap::new),
        }
    }

    pub fn id(&self) -> String {
        let base = match &self.kind {
            AnsatzKind::Polytrope { k, l } => format!("polytrope(k={k},l={l})"),
            AnsatzKind::PhiTable { table, l } => {
                format!("phi-table({},kappa={},l={l})", table.source(), table.kappa())
            }
            AnsatzKind::Maxwellian => "maxwellian".to_string(),
            AnsatzKind::Fluid(eos) => format!("fluid({})", eos.name()),
        };
        format!("{base};{}", self.convention.as_str())
    }

    /// Power-law fit of `g` over `n` log-spaced points of
    /// `[y_hi 1e-4, y_hi]`. Used to check `g(y) >= C y^{n+l}` near 0.
    pub fn small_y_fit(&self, y_hi: f64) -> Result<PowerFit> {
        let ys: Vec<f64> = (0..=40).map(|i| y_hi * 10f64.powf(-4.0 + 0.1 * i as f64)).collect();
        let gs = ys.iter().map(|&y| self.g(y)).collect::<Result<Vec<_>>>()?;
        power_fit(&ys, &gs, 0.0, f64::INFINITY)
            .ok_or_else(|| Error::InsufficientData("g vanishes on the fit range".into()))
    }
}

/// Evaluates `g` with optional memoization keyed on the exact bits of `y`.
/// Owned by one integration; not shared between threads.
#[derive(Debug)]
pub struct GEvaluator<'a> {
    ansatz: &'a AnsatzModel,
    memo: Option<HashMap<u64, f64>>,
}

impl GEvaluator<'_> {
    pub fn g(&mut self, y: f64) -> Result<f64> {
        match &mut self.memo {
            None => self.ansatz.g(y),
            Some(memo) => {
                if let Some(&v) = memo.get(&y.to_bits()) {
                    return Ok(v);
                }
                let v = self.ansatz.g(y)?;
                memo.insert(y.to_bits(), v);
                Ok(v)
            }
        }
    }

    pub fn cache_len(&self) -> usize {
        self.memo.as_ref().map_or(0, HashMap::len)
    }
}
