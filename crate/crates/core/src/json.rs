//! JSON encodings of ring elements, modules, superconnections, families and
//! index reports. Floats are written in shortest round-trip form, so every
//! encoding round-trips bit for bit.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordAlgebra, GradedCliffordModule};
use crate::error::{Error, Result};
use crate::examples::{self, CircleGrading, RandomOptions, Spin, Supercharge};
use crate::family::cocycle::{ChartSummary, CechReport, DifferentialCocycle, IndexOptions};
use crate::family::gluing::GluingReport;
use crate::family::{FamilySample, Grid};
use crate::linalg::CMat;
use crate::opform::OpForm;
use crate::ring::{Monomial, RingElement, RingSignature};
use crate::superconn::{SuperBundle, Superconnection};
use crate::Complex64;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exps: Vec<u8>,
    /// Indices `i` of the `dx_i`, ascending.
    #[serde(default)]
    pub forms: Vec<usize>,
    /// Indices into the signature's odd parameters, ascending.
    #[serde(default)]
    pub odds: Vec<usize>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<RingSignature>,
    pub terms: Vec<TermJson>,
}

fn mask(idx: &[usize], limit: usize, what: &str) -> Result<u32> {
    let mut m = 0u32;
    for &i in idx {
        if i >= limit || m & (1 << i) != 0 {
            return Err(Error::Parse(format!("bad {what} index {i}")));
        }
        m |= 1 << i;
    }
    Ok(m)
}

fn bits(m: u32) -> Vec<usize> {
    (0..32).filter(|i| m & (1 << i) != 0).collect()
}

fn term_to_json(k: &Monomial, v: Complex64) -> TermJson {
    TermJson { exps: k.exps.to_vec(), forms: bits(k.forms), odds: bits(k.odds), re: v.re, im: v.im }
}

fn term_from_json(t: &TermJson, sig: &RingSignature) -> Result<(Monomial, Complex64)> {
    if t.exps.len() != sig.m {
        return Err(Error::Parse(format!("term has {} exponents, signature has m = {}", t.exps.len(), sig.m)));
    }
    let k = Monomial {
        exps: t.exps.iter().copied().collect(),
        forms: mask(&t.forms, sig.m, "form")?,
        odds: mask(&t.odds, sig.odd_params.len(), "odd parameter")?,
    };
    if k.total_degree() > sig.degree {
        return Err(Error::Parse(format!("term of degree {} exceeds D = {}", k.total_degree(), sig.degree)));
    }
    Ok((k, Complex64::new(t.re, t.im)))
}

pub fn ring_to_json(a: &RingElement, with_signature: bool) -> RingJson {
    RingJson {
        signature: with_signature.then(|| (**a.signature()).clone()),
        terms: a.terms().map(|(k, v)| term_to_json(k, *v)).collect(),
    }
}

pub fn ring_from_json(j: &RingJson, sig: Option<&Arc<RingSignature>>) -> Result<RingElement> {
    let sig = match (&j.signature, sig) {
        (Some(s), _) => {
            s.validate()?;
            Arc::new(s.clone())
        }
        (None, Some(s)) => s.clone(),
        (None, None) => return Err(Error::Parse("ring element without signature".into())),
    };
    let mut r = RingElement::zero(&sig);
    for t in &j.terms {
        let (k, v) = term_from_json(t, &sig)?;
        r.add_term(k, v);
    }
    Ok(r)
}

/// Dense complex matrix as rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMat) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_json(j: &MatrixJson, n: usize) -> Result<CMat> {
    if j.len() != n || j.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("expected a {n}×{n} matrix")));
    }
    Ok(CMat::from_fn(n, n, |i, k| Complex64::new(j[i][k][0], j[i][k][1])))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleJson {
    pub p: usize,
    pub q: usize,
    #[serde(default = "trivial_algebra")]
    pub algebra: CliffordAlgebra,
    #[serde(default)]
    pub generators: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_structure: Option<MatrixJson>,
}

fn trivial_algebra() -> CliffordAlgebra {
    CliffordAlgebra::complex(0)
}

pub fn module_to_json(m: &GradedCliffordModule) -> ModuleJson {
    let n = m.dim();
    ModuleJson {
        p: m.p,
        q: m.q,
        algebra: m.algebra,
        generators: m.generators.iter().map(matrix_to_json).collect(),
        metric: (m.metric != CMat::identity(n, n)).then(|| matrix_to_json(&m.metric)),
        real_structure: m.real_structure.as_ref().map(matrix_to_json),
    }
}

/// Parses and validates a module; the metric defaults to the identity.
pub fn module_from_json(j: &ModuleJson) -> Result<GradedCliffordModule> {
    let n = j.p + j.q;
    let gens = j.generators.iter().map(|g| matrix_from_json(g, n)).collect::<Result<Vec<_>>>()?;
    let mut m = GradedCliffordModule::new(j.algebra, j.p, j.q, gens)?;
    if let Some(g) = &j.metric {
        m = m.with_metric(matrix_from_json(g, n)?)?;
    }
    if let Some(r) = &j.real_structure {
        m = m.with_real_structure(matrix_from_json(r, n)?)?;
    }
    Ok(m)
}

/// Rows of entries, each a ring element without its signature.
pub type FormMatrixJson = Vec<Vec<RingJson>>;

pub fn opform_to_json(x: &OpForm) -> FormMatrixJson {
    x.entries().iter().map(|row| row.iter().map(|e| ring_to_json(e, false)).collect()).collect()
}

pub fn opform_from_json(j: &FormMatrixJson, sig: &Arc<RingSignature>, p: usize, q: usize) -> Result<OpForm> {
    let entries = j
        .iter()
        .map(|row| row.iter().map(|e| ring_from_json(e, Some(sig))).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    OpForm::from_entries(sig, p, q, &entries)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperconnectionJson {
    pub signature: RingSignature,
    pub bundle: ModuleJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<FormMatrixJson>,
    /// Components keyed by form degree.
    #[serde(default)]
    pub components: BTreeMap<String, FormMatrixJson>,
}

pub fn superconnection_to_json(a: &Superconnection) -> SuperconnectionJson {
    SuperconnectionJson {
        signature: (**a.signature()).clone(),
        bundle: module_to_json(&a.bundle().module),
        omega: (!a.omega().is_zero()).then(|| opform_to_json(a.omega())),
        components: a.components().iter().map(|(k, x)| (k.to_string(), opform_to_json(x))).collect(),
    }
}

/// Parses the structure; validity (oddness, Clifford-linearity) is checked
/// by the superconnection constructor.
pub fn superconnection_from_json(j: &SuperconnectionJson) -> Result<Superconnection> {
    j.signature.validate()?;
    let sig = Arc::new(j.signature.clone());
    let module = module_from_json(&j.bundle)?;
    let (p, q) = (module.p, module.q);
    let omega = match &j.omega {
        Some(o) => opform_from_json(o, &sig, p, q)?,
        None => OpForm::zero(&sig, p, q),
    };
    let mut components = BTreeMap::new();
    for (k, x) in &j.components {
        let deg: usize = k.parse().map_err(|_| Error::Parse(format!("component key `{k}` is not a degree")))?;
        if deg == 1 {
            return Err(Error::Parse("the degree-1 component goes in `omega`".into()));
        }
        components.insert(deg, opform_from_json(x, &sig, p, q)?);
    }
    Superconnection::new(SuperBundle::new(module, sig)?, omega, components)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperchargeJson {
    pub matrix: MatrixJson,
    pub p: usize,
    pub q: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyJson {
    #[serde(default = "default_family_name")]
    pub name: String,
    pub grid: Grid,
    pub superconnection: SuperconnectionJson,
    #[serde(default = "default_jet_order")]
    pub jet_order: usize,
    pub margin: f64,
}

fn default_family_name() -> String {
    "family".into()
}

fn default_jet_order() -> usize {
    2
}

pub fn family_to_json(f: &FamilySample) -> FamilyJson {
    FamilyJson {
        name: f.name.clone(),
        grid: f.grid.clone(),
        superconnection: superconnection_to_json(&f.global),
        jet_order: f.jet_order,
        margin: f.margin,
    }
}

pub fn family_from_json(j: &FamilyJson) -> Result<FamilySample> {
    let g = Grid::new(j.grid.extents.clone(), j.grid.resolution.clone(), j.grid.periodic)?;
    FamilySample::new(&j.name, g, superconnection_from_json(&j.superconnection)?, j.jet_order, j.margin)
}

/// A named example with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExampleRef {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin: Option<Spin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading: Option<CircleGrading>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub enum Example {
    Superconnection(Superconnection),
    Supercharge(Supercharge),
    Family(FamilySample),
}

pub const EXAMPLE_NAMES: [&str; 5] = ["susy_oscillator", "circle_dirac", "spectral_flow", "constant_spectrum", "random"];

impl ExampleRef {
    pub fn named(name: &str) -> Self {
        ExampleRef { name: name.into(), n: None, spin: None, grading: None, extent: None, resolution: None, seed: None }
    }

    pub fn build(&self) -> Result<Example> {
        match self.name.as_str() {
            "susy_oscillator" => Ok(Example::Supercharge(examples::susy_oscillator(self.n.unwrap_or(16))?)),
            "circle_dirac" => Ok(Example::Supercharge(examples::circle_dirac(
                self.n.unwrap_or(8),
                self.spin.unwrap_or(Spin::Periodic),
                self.grading.unwrap_or(CircleGrading::Spinor),
            )?)),
            "spectral_flow" => Ok(Example::Family(examples::spectral_flow_family(
                self.extent.unwrap_or(1.0),
                self.resolution.unwrap_or(64),
            )?)),
            "constant_spectrum" => Ok(Example::Family(examples::constant_spectrum_family(
                self.extent.unwrap_or(1.0),
                self.resolution.unwrap_or(32),
            )?)),
            "random" => Ok(Example::Superconnection(examples::random_superconnection(
                self.seed.unwrap_or(0),
                &RandomOptions::default(),
            )?)),
            other => Err(Error::Parse(format!("unknown example `{other}`; known: {}", EXAMPLE_NAMES.join(", ")))),
        }
    }
}

/// One problem per file: exactly one of the input kinds is expected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub superconnection: Option<SuperconnectionJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supercharge: Option<SuperchargeJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<ExampleRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

impl ProblemSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: ProblemSpec = serde_json::from_str(text)?;
        if spec.schema_version > SCHEMA_VERSION {
            return Err(Error::Parse(format!("schema_version {} is newer than {SCHEMA_VERSION}", spec.schema_version)));
        }
        let given = [
            spec.superconnection.is_some(),
            spec.supercharge.is_some(),
            spec.family.is_some(),
            spec.example.is_some(),
        ];
        if given.iter().filter(|&&b| b).count() != 1 {
            return Err(Error::Parse(
                "a spec holds exactly one of `superconnection`, `supercharge`, `family`, `example`".into(),
            ));
        }
        Ok(spec)
    }

    pub fn build(&self) -> Result<Example> {
        if let Some(a) = &self.superconnection {
            return superconnection_from_json(a).map(Example::Superconnection);
        }
        if let Some(s) = &self.supercharge {
            let n = s.p + s.q;
            let matrix = matrix_from_json(&s.matrix, n)?;
            return Ok(Example::Supercharge(Supercharge {
                name: "supercharge".into(),
                matrix,
                p: s.p,
                q: s.q,
                module: None,
            }));
        }
        if let Some(f) = &self.family {
            return family_from_json(f).map(Example::Family);
        }
        match &self.example {
            Some(e) => e.build(),
            None => Err(Error::Parse("empty spec".into())),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GluingJson {
    pub lambda: f64,
    pub mu: f64,
    pub points: usize,
    pub report: GluingReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointEtaJson {
    pub lambda: f64,
    pub x: Vec<f64>,
    pub eta_norm: f64,
    pub chern_norm: f64,
    pub satisfies_residual: f64,
}

/// Cocycle report: cutoff charts with rank tables, gluing invariants, Čech
/// checks, and per-point eta norms.
#[derive(Clone, Debug, Serialize)]
pub struct CocycleJson {
    pub schema_version: u32,
    pub family: String,
    pub n: i32,
    pub lambdas: Vec<f64>,
    pub margin: f64,
    pub eta_tol_requested: f64,
    pub eta_error_achieved: f64,
    pub charts: Vec<ChartSummary>,
    pub gluing: Vec<GluingJson>,
    pub cech: CechReport,
    pub eta: Vec<PointEtaJson>,
}

pub fn cocycle_to_json(family: &FamilySample, c: &DifferentialCocycle, opts: &IndexOptions) -> CocycleJson {
    let charts = c.summaries(family);
    let eta_error_achieved = charts.iter().map(|s| s.quad_error).fold(0.0, f64::max);
    let eta = c
        .charts
        .iter()
        .flat_map(|ch| {
            ch.local.values().map(move |l| PointEtaJson {
                lambda: ch.bundle.lambda,
                x: family.grid.point(l.idx),
                eta_norm: l.eta.max_abs(),
                chern_norm: l.chern.max_abs(),
                satisfies_residual: l.satisfies_residual,
            })
        })
        .collect();
    CocycleJson {
        schema_version: SCHEMA_VERSION,
        family: family.name.clone(),
        n: c.n,
        lambdas: c.cover.lambdas(),
        margin: c.cover.margin,
        eta_tol_requested: opts.eta_tol,
        eta_error_achieved,
        charts,
        gluing: c
            .gluing
            .iter()
            .map(|g| GluingJson { lambda: g.lambda, mu: g.mu, points: g.points.len(), report: g.report.clone() })
            .collect(),
        cech: c.cech.clone(),
        eta,
    }
}
