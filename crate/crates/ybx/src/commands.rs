//! Subcommand implementations. Each returns the records of its report.

use std::sync::Arc;

use serde_json::{json, Map, Value};
use ybx_core::convert::{
    embed_spin_as_checkerboard_irf, extract_spin_from_irf, irf_as_irf_vertex, irf_vertex_to_vertex,
    square_weight_compose, vertex_to_spin,
};
use ybx_core::gaussian::{gaussian_star_triangle_check, potts_limit_star_triangle_check, GaussianStar};
use ybx_core::operators::{
    check_cybe, check_matrix_ybe, commutator_norm, global_inversion_demo, hamiltonian_from_family,
    extract_classical_r, local_inversion, log_log_slope, r_matrix, rcheck_family, solve_diagonal_k, transfer_matrix,
    MatrixRelation, OperatorError, DEFAULT_DIMENSION_CAP,
};
use ybx_core::verify::{
    verify_checkerboard, verify_irf_vertex_ybe, verify_irf_ybe, verify_spin_star_triangle, verify_vertex_ybe,
    CheckerboardPair, SpinConvention,
};
use ybx_core::weights::{
    potts_rapidity_relation_check, potts_spin_weights, slmn_vertex_weight, Checkerboard, Normalization,
    PottsParams, SlmnParams, SpinWeights, TableSpin, VertexWeights,
};
use ybx_core::{Complex64, DenseTensor, ResidualReport};

use crate::batch::run_ordered;
use crate::cli::{
    ConvertArgs, CybeArgs, DemoInversionArgs, EmitArgs, GaussianArgs, Global, InversionArgs, NetEquivArgs, NetInput,
    NetReduceArgs, OpYbeArgs, Output, PottsArgs, ReflectionArgs, TransferArgs, VerifyArgs,
};
use crate::complex::{complex_to_json, parse_complex};
use crate::error::YbxError;
use crate::netlist::{load_netlist, netlist_value, save_netlist};
use crate::records::{CheckRecord, Outcome, Record};
use crate::sampling::Sampler;
use crate::weightfile::{
    load_weight_file, rapidity_from_json, rapidity_to_json, save_weight_file, tabulate_family, weight_file_to_string,
    Family, LoadedWeights, RapidityForm, WeightFile, WeightKind,
};
use ybx_core::Rapidity;

pub const YBE_TOL: f64 = 1e-10;
pub const TRANSFER_TOL: f64 = 1e-9;
pub const REFLECTION_TOL: f64 = 1e-8;
pub const KIRCHHOFF_TOL: f64 = 1e-11;
pub const GAUSSIAN_TOL: f64 = 1e-12;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub file: WeightFile,
}

fn slmn_entry(name: &'static str, description: &'static str, params: SlmnParams) -> CatalogEntry {
    CatalogEntry { name, description, file: WeightFile::slmn(&params) }
}

pub fn catalog() -> Vec<CatalogEntry> {
    let eta = 0.5;
    vec![
        slmn_entry("slmn02", "sl(0|2): six-vertex", SlmnParams::six_vertex(eta)),
        slmn_entry("slmn03", "sl(0|3)", SlmnParams::new(0, 3, c(eta))),
        slmn_entry("slmn11", "sl(1|1)", SlmnParams::new(1, 1, c(eta))),
        slmn_entry("slmn21", "sl(2|1)", SlmnParams::new(2, 1, c(eta))),
        slmn_entry(
            "six-vertex-unit",
            "six-vertex scaled so that the weight at equal rapidities is the identity",
            SlmnParams::six_vertex(eta).with_norm(Normalization::Constant(c(1.0 / eta.sinh()))),
        ),
        slmn_entry("classical", "six-vertex family with R = 1 at eta = 0, here eta = 0.1", SlmnParams::classical(0.1)),
        CatalogEntry { name: "potts2", description: "2-state Potts pair", file: WeightFile::potts(2, WeightKind::Spin) },
        CatalogEntry { name: "potts3", description: "3-state Potts pair", file: WeightFile::potts(3, WeightKind::Spin) },
    ]
}

pub fn catalog_list() -> Outcome {
    let mut out = Outcome::default();
    for e in catalog() {
        let source = serde_json::to_value(&e.file.source).expect("source serialises");
        out.push(Record::data(
            "catalog-entry",
            json!({"entry": e.name, "kind": e.file.kind.name(), "Q": e.file.q, "description": e.description, "source": source}),
        ));
    }
    out
}

pub fn catalog_file(name: &str, kind: Option<&str>) -> Result<WeightFile, YbxError> {
    let entry = catalog()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| YbxError::Usage(format!("no catalog entry `{name}`")))?;
    let mut file = entry.file;
    if let Some(k) = kind {
        file.kind = WeightKind::parse(k)?;
        file.build().map_err(|e| YbxError::Usage(format!("{name} as {k}: {e}")))?;
    }
    Ok(file)
}

pub fn catalog_emit(a: &EmitArgs) -> Result<Output, YbxError> {
    let file = catalog_file(&a.name, a.kind.as_deref())?;
    match &a.out {
        Some(path) => {
            save_weight_file(&file, path)?;
            let mut out = Outcome::default();
            out.push(Record::data("written", json!({"entry": a.name, "path": path})));
            Ok(Output::Report(out))
        }
        None => Ok(Output::Raw(weight_file_to_string(&file)?)),
    }
}

fn rap_json(t: &[Rapidity]) -> Value {
    Value::Array(t.iter().map(rapidity_to_json).collect())
}

/// All relation checks for one rapidity triple.
pub fn verify_trial(
    family: &Family,
    t: &[Rapidity; 3],
    tol: f64,
    convention: SpinConvention,
) -> Result<Vec<ResidualReport>, YbxError> {
    let [p, q, r] = t;
    let pair = |cb| -> Result<Vec<ResidualReport>, YbxError> {
        let rep = verify_checkerboard(&cb, p, q, r, tol)?;
        Ok(vec![rep.first, rep.second])
    };
    match family {
        Family::Vertex(w) => Ok(vec![verify_vertex_ybe(w.as_ref(), p, q, r, tol)?]),
        Family::Spin(w) => {
            let rep = verify_spin_star_triangle(w.as_ref(), p, q, r, tol, convention)?;
            Ok(vec![rep.first, rep.second])
        }
        Family::Irf(w) => Ok(vec![verify_irf_ybe(w.as_ref(), p, q, r, tol)?]),
        Family::IrfVertex(w) => Ok(vec![verify_irf_vertex_ybe(w.as_ref(), p, q, r, tol)?]),
        Family::CheckerboardVertex(cb) => pair(CheckerboardPair::Vertex(cb.plain.as_ref(), cb.barred.as_ref())),
        Family::CheckerboardIrf(cb) => pair(CheckerboardPair::Irf(cb.plain.as_ref(), cb.barred.as_ref())),
        Family::CheckerboardIrfVertex(cb) => pair(CheckerboardPair::IrfVertex(cb.plain.as_ref(), cb.barred.as_ref())),
    }
}

fn pair_records(reps: Vec<ResidualReport>, trial: usize, t: &[Rapidity]) -> Vec<CheckRecord> {
    let gap = match (reps.first().and_then(|r| r.scalar_r), reps.get(1).and_then(|r| r.scalar_rbar)) {
        (Some(a), Some(b)) => Some((a - b).norm()),
        _ => None,
    };
    reps.iter()
        .enumerate()
        .map(|(k, rep)| {
            let mut rec = CheckRecord::from_report(rep, Some(trial)).with("rapidities", rap_json(t));
            if let (1, Some(g)) = (k, gap) {
                rec = rec.with("scalar_gap", json!(g));
            }
            rec
        })
        .collect()
}

pub fn verify_loaded(loaded: &LoadedWeights, trials: usize, transposed: bool, g: &Global) -> Result<Outcome, YbxError> {
    if transposed && !matches!(loaded.family, Family::Spin(_)) {
        return Err(YbxError::Usage("--transposed applies to spin weights only".into()));
    }
    let convention = if transposed { SpinConvention::Transposed } else { SpinConvention::AsPrinted };
    let tol = g.tol_or(YBE_TOL);
    let mut s = Sampler::new(g.seed);
    let inputs: Vec<[Rapidity; 3]> = (0..trials).map(|_| s.triple(loaded.form)).collect();
    let per = run_ordered(&inputs, g.jobs, |i, t| {
        Ok(pair_records(verify_trial(&loaded.family, t, tol, convention)?, i + 1, t))
    })?;
    let mut out = Outcome::default();
    per.into_iter().flatten().for_each(|r| out.push(r));
    Ok(out)
}

pub fn verify(a: &VerifyArgs, g: &Global) -> Result<Outcome, YbxError> {
    verify_loaded(&load_weight_file(&a.weights)?, a.trials, a.transposed, g)
}

/// Parses a rapidity given on the command line: a complex string or JSON.
pub fn parse_rapidity_arg(s: &str) -> Result<Rapidity, YbxError> {
    let t = s.trim();
    if t.starts_with('[') || t.starts_with('{') {
        let v: Value = serde_json::from_str(t).map_err(|e| YbxError::Usage(format!("rapidity `{s}`: {e}")))?;
        rapidity_from_json(&v).map_err(|e| YbxError::Usage(format!("rapidity `{s}`: {e}")))
    } else {
        parse_complex(t).map(Rapidity::Scalar).map_err(|e| YbxError::Usage(e.to_string()))
    }
}

/// Brings a rapidity into `form`, lifting scalars to trivially gauged vectors.
pub fn adapt(r: Rapidity, form: RapidityForm) -> Result<Rapidity, YbxError> {
    match (&r, form) {
        (Rapidity::Scalar(z), RapidityForm::Vector(q)) => Ok(Rapidity::trivial_gauge(*z, q)),
        (Rapidity::Scalar(_), RapidityForm::Scalar)
        | (Rapidity::Pair(..), RapidityForm::Pair) => Ok(r),
        (Rapidity::Vector(v), RapidityForm::Vector(q)) if v.len() == 2 * q + 1 => Ok(r),
        _ => Err(YbxError::Usage(format!("rapidity {} does not fit this family", rapidity_to_json(&r)))),
    }
}

fn default_rapidities(form: RapidityForm) -> (Rapidity, Rapidity) {
    match form {
        RapidityForm::Pair => (Rapidity::Pair(c(0.7), c(0.9)), Rapidity::Pair(c(0.2), c(0.35))),
        other => (adapt(Rapidity::real(0.7), other).expect("scalar lifts"), adapt(Rapidity::real(0.2), other).expect("scalar lifts")),
    }
}

fn mixed_to_vertex(cb: Checkerboard<Arc<dyn ybx_core::weights::IrfVertexWeights>>) -> Family {
    Family::CheckerboardVertex(Checkerboard {
        plain: Arc::new(irf_vertex_to_vertex(cb.plain)),
        barred: Arc::new(irf_vertex_to_vertex(cb.barred)),
    })
}

fn spin_to_mixed(s: Arc<dyn SpinWeights>) -> Checkerboard<Arc<dyn ybx_core::weights::IrfVertexWeights>> {
    let cb = embed_spin_as_checkerboard_irf(s);
    Checkerboard { plain: Arc::new(irf_as_irf_vertex(cb.plain)), barred: Arc::new(irf_as_irf_vertex(cb.barred)) }
}

/// Converts a family and reports the rapidity form the result takes.
/// `p`, `q` are only used where a conversion needs a tabulation.
pub fn convert_family(
    family: Family,
    form: RapidityForm,
    to: WeightKind,
    p: &Rapidity,
    q: &Rapidity,
) -> Result<(Family, RapidityForm), YbxError> {
    let from = family.kind();
    let converted = match (family, to) {
        (f, k) if f.kind() == k => f,
        (Family::Spin(s), WeightKind::Vertex) => return Ok((Family::Vertex(Arc::new(square_weight_compose(s))), RapidityForm::Pair)),
        (Family::Spin(s), WeightKind::CheckerboardIrf) => {
            let cb = embed_spin_as_checkerboard_irf(s);
            Family::CheckerboardIrf(Checkerboard { plain: Arc::new(cb.plain), barred: Arc::new(cb.barred) })
        }
        (Family::Spin(s), WeightKind::CheckerboardIrfVertex) => Family::CheckerboardIrfVertex(spin_to_mixed(s)),
        (Family::Spin(s), WeightKind::CheckerboardVertex) => mixed_to_vertex(spin_to_mixed(s)),
        (Family::Vertex(v), WeightKind::Spin) => Family::Spin(Arc::new(vertex_to_spin(v))),
        (Family::Irf(w), WeightKind::IrfVertex) => Family::IrfVertex(Arc::new(irf_as_irf_vertex(w))),
        (Family::Irf(w), WeightKind::Vertex) => Family::Vertex(Arc::new(irf_vertex_to_vertex(irf_as_irf_vertex(w)))),
        (Family::IrfVertex(w), WeightKind::Vertex) => Family::Vertex(Arc::new(irf_vertex_to_vertex(w))),
        (Family::CheckerboardIrf(cb), WeightKind::CheckerboardIrfVertex) => Family::CheckerboardIrfVertex(Checkerboard {
            plain: Arc::new(irf_as_irf_vertex(cb.plain)),
            barred: Arc::new(irf_as_irf_vertex(cb.barred)),
        }),
        (Family::CheckerboardIrf(cb), WeightKind::CheckerboardVertex) => mixed_to_vertex(Checkerboard {
            plain: Arc::new(irf_as_irf_vertex(cb.plain)),
            barred: Arc::new(irf_as_irf_vertex(cb.barred)),
        }),
        (Family::CheckerboardIrfVertex(cb), WeightKind::CheckerboardVertex) => mixed_to_vertex(cb),
        (Family::CheckerboardIrf(cb), WeightKind::Spin) => {
            let (w, wbar) = extract_spin_from_irf(&cb.plain.eval(p, q)?, &cb.barred.eval(p, q)?)?;
            Family::Spin(Arc::new(TableSpin::new(w, wbar)?))
        }
        (_, to) => {
            return Err(YbxError::Usage(format!("no conversion from {} to {}", from.name(), to.name())));
        }
    };
    Ok((converted, form))
}

pub fn convert(a: &ConvertArgs) -> Result<Output, YbxError> {
    let loaded = load_weight_file(&a.weights)?;
    let to = WeightKind::parse(&a.to)?;
    let target_form = match (loaded.family.kind(), to) {
        (WeightKind::Spin, WeightKind::Vertex) => RapidityForm::Pair,
        _ => loaded.form,
    };
    let (dp, dq) = default_rapidities(target_form);
    let p = a.p.as_deref().map(parse_rapidity_arg).transpose()?.map_or(Ok(dp), |r| adapt(r, target_form))?;
    let q = a.q.as_deref().map(parse_rapidity_arg).transpose()?.map_or(Ok(dq), |r| adapt(r, target_form))?;
    let (family, _) = convert_family(loaded.family, loaded.form, to, &p, &q)?;
    let table = tabulate_family(&family, &p, &q)?;
    match &a.out {
        Some(path) => {
            save_weight_file(&table, path)?;
            let mut out = Outcome::default();
            out.push(Record::data("written", json!({"kind": to.name(), "path": path})));
            Ok(Output::Report(out))
        }
        None => Ok(Output::Raw(weight_file_to_string(&table)?)),
    }
}

fn vertex_of(loaded: &LoadedWeights) -> Result<Arc<dyn VertexWeights>, YbxError> {
    match &loaded.family {
        Family::Vertex(w) => Ok(w.clone()),
        other => Err(YbxError::Usage(format!("this command needs vertex weights, got {}", other.kind().name()))),
    }
}

/// Maps a scalar rapidity into the family's form.
fn lifter(form: RapidityForm) -> Result<impl Fn(Complex64) -> Rapidity + Sync, YbxError> {
    match form {
        RapidityForm::Pair => Err(YbxError::Usage("operator commands need scalar or vector rapidities".into())),
        f => Ok(move |z: Complex64| match f {
            RapidityForm::Vector(q) => Rapidity::trivial_gauge(z, q),
            _ => Rapidity::Scalar(z),
        }),
    }
}

pub fn operators_ybe(a: &OpYbeArgs, g: &Global) -> Result<Outcome, YbxError> {
    if a.sites < 3 {
        return Err(YbxError::Usage("--sites must be at least 3".into()));
    }
    let loaded = load_weight_file(&a.weights)?;
    let w = vertex_of(&loaded)?;
    let tol = g.tol_or(YBE_TOL);
    let mut s = Sampler::new(g.seed);
    let inputs: Vec<[Rapidity; 3]> = (0..a.trials).map(|_| s.triple(loaded.form)).collect();
    let per = run_ordered(&inputs, g.jobs, |i, [p, q, r]| {
        let (pq, pr, qr) = (w.eval(p, q)?, w.eval(p, r)?, w.eval(q, r)?);
        let rf = check_matrix_ybe(MatrixRelation::RForm { pq: &pq, pr: &pr, qr: &qr }, tol)?;
        let cf = check_matrix_ybe(MatrixRelation::RcheckForm { pq: &pq, pr: &pr, qr: &qr, sites: a.sites }, tol)?;
        let mut rc = CheckRecord::from_report(&cf.relation, Some(i + 1));
        rc.pass = cf.pass();
        if let Some(f) = cf.far_commutation {
            rc = rc.with("far_commutation", json!(f));
        }
        Ok([CheckRecord::from_report(&rf.relation, Some(i + 1)), rc.with("sites", json!(a.sites))])
    })?;
    let mut out = Outcome::default();
    per.into_iter().flatten().for_each(|r| out.push(r));
    Ok(out)
}

pub fn operators_transfer(a: &TransferArgs, g: &Global) -> Result<Outcome, YbxError> {
    let loaded = load_weight_file(&a.weights)?;
    let w = vertex_of(&loaded)?;
    let lift = lifter(loaded.form)?;
    let tol = g.tol_or(TRANSFER_TOL);
    let row = |l: usize, x: f64| -> Result<DenseTensor, OperatorError> {
        Ok(transfer_matrix(&w.eval(&lift(c(a.p)), &lift(c(x)))?, l, DEFAULT_DIMENSION_CAP)?.into_matrix())
    };
    let per = run_ordered(&a.lengths, g.jobs, |_, &l| {
        if l == 0 {
            return Err(YbxError::Usage("row length must be positive".into()));
        }
        let ts = a.grid.iter().map(|&x| row(l, x)).collect::<Result<Vec<_>, _>>()?;
        let mut worst = 0.0f64;
        for (i, x) in ts.iter().enumerate() {
            for y in &ts[i + 1..] {
                worst = worst.max(commutator_norm(x, y)?);
            }
        }
        let mut recs = vec![CheckRecord::absolute("transfer-commutation", worst, tol, None).with("length", json!(l))];
        if a.hamiltonian {
            let fam = |x: f64| row(l, x);
            let h = hamiltonian_from_family(&fam, a.p, a.step)?;
            let mut hw = 0.0f64;
            for t in &ts {
                hw = hw.max(commutator_norm(&h.matrix, t)?);
            }
            recs.push(
                CheckRecord::absolute("hamiltonian-commutation", hw, a.hamiltonian_tol, None)
                    .with("length", json!(l))
                    .with("condition", json!(h.condition))
                    .with("richardson_gap", json!(h.richardson_gap)),
            );
        }
        Ok(recs)
    })?;
    let mut out = Outcome::default();
    per.into_iter().flatten().for_each(|r| out.push(r));
    Ok(out)
}

/// `R_ij(ħ)` of the builtin classical family on three sites.
pub fn classical_r(i: usize, j: usize, pi: f64, pj: f64) -> impl Fn(f64) -> Result<DenseTensor, OperatorError> {
    move |h: f64| {
        let v = slmn_vertex_weight(SlmnParams::classical(h))?;
        let lift = |x: f64| Rapidity::trivial_gauge(c(x), 2);
        Ok(r_matrix(&v.eval(&lift(pi), &lift(pj))?, i, j, 3)?.into_matrix())
    }
}

pub fn operators_cybe(a: &CybeArgs, g: &Global) -> Result<Outcome, YbxError> {
    let tol = g.tol_or(YBE_TOL);
    let mut s = Sampler::new(g.seed);
    let ps = [s.uniform(0.1, 1.2), s.uniform(0.1, 1.2), s.uniform(0.1, 1.2)];
    let fams = [classical_r(0, 1, ps[0], ps[1]), classical_r(0, 2, ps[0], ps[2]), classical_r(1, 2, ps[1], ps[2])];
    let mut out = Outcome::default();
    let mut deviation = 0.0f64;
    for f in &fams {
        let r0 = f(0.0)?;
        deviation = deviation.max(r0.sub(&DenseTensor::identity(r0.extents()[0]))?.max_abs().0);
    }
    out.push(CheckRecord::absolute("classical-identity", deviation, 1e-12, None));
    let mut points = Vec::new();
    for &h in &a.hbar {
        let xs = fams.iter().map(|f| extract_classical_r(f, h)).collect::<Result<Vec<_>, _>>()?;
        let rep = check_cybe(&xs[0], &xs[1], &xs[2], tol)?;
        points.push((h, rep.max_abs));
        out.push(CheckRecord::from_report(&rep, None).with("hbar", json!(h)));
    }
    let slope = if points.len() >= 2 { Some(log_log_slope(&points)) } else { None };
    out.push(Record::data(
        "cybe-convergence",
        json!({"rapidities": ps, "hbar": a.hbar, "residual_abs": points.iter().map(|p| p.1).collect::<Vec<_>>(), "slope": slope}),
    ));
    Ok(out)
}

pub fn reflection_grid(points: usize) -> Vec<f64> {
    (0..points).map(|k| 0.15 + 0.11 * k as f64).collect()
}

pub fn operators_reflection(a: &ReflectionArgs, g: &Global) -> Result<Outcome, YbxError> {
    let loaded = load_weight_file(&a.weights)?;
    let w = vertex_of(&loaded)?;
    let lift = lifter(loaded.form)?;
    let tol = g.tol_or(REFLECTION_TOL);
    let grid = a.grid.clone().unwrap_or_else(|| reflection_grid(a.points));
    let rcheck = rcheck_family(w.as_ref(), &lift);
    let mut out = Outcome::default();
    match solve_diagonal_k(&rcheck, c(a.mu), &grid, c(a.k_ref), tol) {
        Ok(sol) => {
            for (i, &p) in grid.iter().enumerate() {
                let rep = ResidualReport::from_parts("reflection", sol.residuals[i], 1.0, Vec::new(), tol);
                out.push(CheckRecord::from_report(&rep, None).with("p", json!(p)).with("k", complex_to_json(sol.k[i])));
            }
        }
        Err(OperatorError::NoDiagonalSolution { p, residual }) => {
            out.push(CheckRecord::absolute("reflection", residual, tol, None).with("p", json!(p)));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(out)
}

fn inversion_record(w: &dyn VertexWeights, p: &Rapidity, q: &Rapidity, tol: f64, trial: usize) -> Result<(Option<Complex64>, CheckRecord), YbxError> {
    match local_inversion(w, p, q, tol) {
        Ok((cst, rep)) => Ok((Some(cst), CheckRecord::from_report(&rep, Some(trial)))),
        Err(OperatorError::NotProportional { residual }) => {
            Ok((None, CheckRecord::absolute("local-inversion", residual, tol, Some(trial))))
        }
        Err(OperatorError::NotDecoupled { residual }) => {
            Ok((None, CheckRecord::absolute("decoupling", residual, tol, Some(trial))))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn operators_inversion(a: &InversionArgs, g: &Global) -> Result<Outcome, YbxError> {
    let loaded = load_weight_file(&a.weights)?;
    let w = vertex_of(&loaded)?;
    let tol = g.tol_or(YBE_TOL);
    let mut s = Sampler::new(g.seed);
    let inputs: Vec<[Rapidity; 2]> = (0..a.pairs).map(|_| [s.rapidity(loaded.form), s.rapidity(loaded.form)]).collect();
    let per = run_ordered(&inputs, g.jobs, |i, [p, q]| {
        let (c_pq, r1) = inversion_record(w.as_ref(), p, q, tol, i + 1)?;
        let (c_qp, r2) = inversion_record(w.as_ref(), q, p, tol, i + 1)?;
        let mut recs = vec![r1.with("rapidities", rap_json(&[p.clone(), q.clone()])), r2];
        if let (Some(x), Some(y)) = (c_pq, c_qp) {
            recs.push(
                CheckRecord::absolute("inversion-symmetry", (x - y).norm(), tol, Some(i + 1))
                    .with("C_pq", complex_to_json(x))
                    .with("C_qp", complex_to_json(y)),
            );
        }
        Ok(recs)
    })?;
    let mut out = Outcome::default();
    per.into_iter().flatten().for_each(|r| out.push(r));
    Ok(out)
}

pub fn demo_inversion(a: &DemoInversionArgs, g: &Global) -> Result<Outcome, YbxError> {
    let loaded = match &a.weights {
        Some(path) => load_weight_file(path)?,
        None => catalog_file("six-vertex-unit", None)?.build()?,
    };
    let w = vertex_of(&loaded)?;
    let lift = lifter(loaded.form)?;
    let rows = global_inversion_demo(w.as_ref(), &a.sizes, &lift(c(a.p)), &lift(c(a.q)), g.tol_or(YBE_TOL))?;
    let mut out = Outcome::default();
    let deviations: Vec<f64> = rows.iter().map(|r| (r.ratio - 1.0).norm()).collect();
    for (r, d) in rows.iter().zip(&deviations) {
        out.push(Record::data(
            "inversion-row",
            json!({"size": r.rows, "z_pq": complex_to_json(r.z_pq), "z_qp": complex_to_json(r.z_qp),
                   "ratio": complex_to_json(r.ratio), "deviation": d}),
        ));
    }
    let monotone = deviations.windows(2).all(|w| w[1] <= w[0]);
    out.push(Record::data("inversion-trend", json!({"monotone": monotone, "strict": false})));
    Ok(out)
}

fn complex_map<'a>(it: impl Iterator<Item = (&'a String, &'a Complex64)>) -> Value {
    Value::Object(it.map(|(k, v)| (k.clone(), complex_to_json(*v))).collect::<Map<_, _>>())
}

pub fn net_solve(a: &NetInput, g: &Global) -> Result<Outcome, YbxError> {
    let net = load_netlist(&a.input)?;
    let sol = net.solve_kirchhoff()?;
    let mut out = Outcome::default();
    out.push(Record::data(
        "kirchhoff",
        json!({"potentials": complex_map(sol.potentials.iter()),
               "currents": sol.currents.iter().map(|z| complex_to_json(*z)).collect::<Vec<_>>(),
               "power": complex_to_json(sol.power)}),
    ));
    out.push(CheckRecord::absolute("current-conservation", sol.max_imbalance, g.tol_or(KIRCHHOFF_TOL), None));
    Ok(out)
}

pub fn net_reduce(a: &NetReduceArgs, g: &Global) -> Result<Outcome, YbxError> {
    let mut net = load_netlist(&a.input)?;
    if let Some(t) = &a.terminals {
        net = net.with_terminals(t.clone())?;
    }
    let reduced = net.reduce();
    if let Some(path) = &a.out {
        save_netlist(&reduced, path)?;
    }
    let mut out = Outcome::default();
    out.push(Record::data("netlist", json!({"netlist": netlist_value(&reduced)})));
    let terms = net.terminals().to_vec();
    if terms.len() >= 2 {
        let (mut abs, mut rel) = (0.0f64, 0.0f64);
        for (i, x) in terms.iter().enumerate() {
            for y in &terms[i + 1..] {
                let before = net.equivalent_impedance(x, y)?;
                let after = reduced.equivalent_impedance(x, y)?;
                abs = abs.max((before - after).norm());
                rel = rel.max((before - after).norm() / before.norm());
            }
        }
        let mut rec = CheckRecord::absolute("reduction-equivalence", abs, g.tol_or(YBE_TOL), None);
        rec.residual_rel = rel;
        rec.pass = rel <= rec.tol;
        out.push(rec);
    }
    Ok(out)
}

pub fn net_equiv(a: &NetEquivArgs) -> Result<Outcome, YbxError> {
    let [x, y] = a.between.as_slice() else {
        return Err(YbxError::Usage("--between needs exactly two nodes, e.g. --between a,b".into()));
    };
    let net = load_netlist(&a.input)?;
    let z = net.equivalent_impedance(x, y)?;
    let mut out = Outcome::default();
    out.push(Record::data("equivalent-impedance", json!({"a": x, "b": y, "z": complex_to_json(z)})));
    Ok(out)
}

pub fn gaussian_check(a: &GaussianArgs, g: &Global) -> Result<Outcome, YbxError> {
    let (Ok(legs), Ok(phis)) = (<[f64; 3]>::try_from(a.legs.as_slice()), <[f64; 3]>::try_from(a.phis.as_slice())) else {
        return Err(YbxError::Usage("--legs and --phis take three values each".into()));
    };
    let mut stars = vec![GaussianStar::new(a.beta, legs, phis)?];
    let mut s = Sampler::new(g.seed);
    for _ in 0..a.trials {
        let beta = s.uniform(0.5, 2.0);
        let legs = [s.uniform(0.5, 3.0), s.uniform(0.5, 3.0), s.uniform(0.5, 3.0)];
        let phis = [s.uniform(-1.0, 1.0), s.uniform(-1.0, 1.0), s.uniform(-1.0, 1.0)];
        stars.push(GaussianStar::new(beta, legs, phis)?);
    }
    let tol = g.tol_or(GAUSSIAN_TOL);
    let per = run_ordered(&stars, g.jobs, |i, star| {
        let chk = gaussian_star_triangle_check(star, tol, a.quad_tol)?;
        let params = json!({"beta": star.beta, "legs": star.legs, "phis": star.phis});
        Ok([
            CheckRecord::from_report(&chk.closed_form, Some(i + 1)).with("params", params.clone()),
            CheckRecord::from_report(&chk.quadrature, Some(i + 1)).with("params", params),
        ])
    })?;
    let mut out = Outcome::default();
    per.into_iter().flatten().for_each(|r| out.push(r));
    Ok(out)
}

pub fn potts_check(a: &PottsArgs, g: &Global) -> Result<Outcome, YbxError> {
    let tol = g.tol_or(YBE_TOL);
    let mut s = Sampler::new(g.seed);
    let inputs: Vec<[f64; 3]> = (0..a.trials).map(|_| [s.uniform(0.1, 1.2), s.uniform(0.1, 1.2), s.uniform(0.1, 1.2)]).collect();
    let per: Vec<Vec<CheckRecord>> = if a.zero_limit {
        let params = PottsParams::zero_limit();
        run_ordered(&inputs, g.jobs, |i, &[p, q, r]| {
            let chk = potts_limit_star_triangle_check(a.c, p, q, r, tol)?;
            let u = p - q;
            let x = params.x(c(u))?;
            let gap = (x - c(u.tan())).norm();
            Ok(vec![
                CheckRecord::from_report(&chk.report, Some(i + 1)).with("rapidities", json!([p, q, r])),
                CheckRecord::absolute("x-is-tan", gap, tol, Some(i + 1)),
            ])
        })?
    } else {
        let params = PottsParams::new(a.states as f64)?;
        let spin = potts_spin_weights(params)?;
        run_ordered(&inputs, g.jobs, |i, &[p, q, r]| {
            let t = [Rapidity::real(p), Rapidity::real(q), Rapidity::real(r)];
            let rep = verify_spin_star_triangle(&spin, &t[0], &t[1], &t[2], tol, SpinConvention::AsPrinted)?;
            let mut recs = pair_records(vec![rep.first, rep.second], i + 1, &t);
            let rel = potts_rapidity_relation_check(&params, c(p), c(q), c(r), tol)?;
            recs.push(CheckRecord::from_report(&rel, Some(i + 1)));
            Ok(recs)
        })?
    };
    let mut out = Outcome::default();
    per.into_iter().flatten().for_each(|r| out.push(r));
    Ok(out)
}
