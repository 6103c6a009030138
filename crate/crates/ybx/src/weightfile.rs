//! JSON weight files.
//!
//! ```json
//! {"kind": "vertex", "Q": 2,
//!  "source": {"builtin": {"name": "slmn", "params": {"m": 0, "n": 2, "eta": [0.5, 0]}}}}
//! ```
//!
//! Tables store nested arrays whose leaves are `[re, im]` pairs or complex
//! strings. Kinds with two tensors use an object: `{"w", "wbar"}` for spin
//! pairs and `{"plain", "barred"}` for checkerboard pairs.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use ybx_core::convert::{embed_spin_as_checkerboard_irf, irf_as_irf_vertex, irf_vertex_to_vertex, square_weight_compose};
use ybx_core::weights::{
    potts_spin_weights, slmn_vertex_weight, validate_slmn, Checkerboard, IrfVertexWeights, IrfWeights,
    Normalization, PottsParams, SlmnParams, SpinWeights, TableIrf, TableIrfVertex, TableSpin, TableVertex,
    VertexWeights,
};
use ybx_core::{Complex64, DenseTensor, Rapidity};

use crate::complex::{complex_from_json, complex_to_json};
use crate::error::YbxError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    Vertex,
    Spin,
    Irf,
    IrfVertex,
    CheckerboardVertex,
    CheckerboardIrf,
    CheckerboardIrfVertex,
}

impl WeightKind {
    pub fn name(self) -> &'static str {
        match self {
            WeightKind::Vertex => "vertex",
            WeightKind::Spin => "spin",
            WeightKind::Irf => "irf",
            WeightKind::IrfVertex => "irf-vertex",
            WeightKind::CheckerboardVertex => "checkerboard-vertex",
            WeightKind::CheckerboardIrf => "checkerboard-irf",
            WeightKind::CheckerboardIrfVertex => "checkerboard-irf-vertex",
        }
    }

    pub fn parse(s: &str) -> Result<Self, YbxError> {
        serde_json::from_value(Value::String(s.to_string()))
            .map_err(|_| YbxError::Usage(format!("unknown weight kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightFile {
    pub kind: WeightKind,
    #[serde(rename = "Q")]
    pub q: usize,
    #[serde(rename = "Qf", default, skip_serializing_if = "Option::is_none")]
    pub qf: Option<usize>,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Source {
    Builtin(Builtin),
    Table(Table),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Builtin {
    pub name: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table {
    pub p: Value,
    pub q: Value,
    pub data: Value,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct SlmnFileParams {
    m: usize,
    n: usize,
    eta: Value,
    #[serde(rename = "G", default)]
    g: Option<Vec<Vec<Value>>>,
    #[serde(default)]
    norm: Option<Value>,
    #[serde(default)]
    norm_over_sinh: Option<Value>,
    #[serde(default)]
    epsilon: Option<Vec<i8>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct PottsFileParams {
    #[serde(rename = "N")]
    n: f64,
    #[serde(default)]
    c: Option<f64>,
}

/// How rapidities are drawn for a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RapidityForm {
    Scalar,
    /// `2Q+1` components with gauge entries.
    Vector(usize),
    /// Two scalars, for square-lattice compositions.
    Pair,
}

#[derive(Clone)]
pub enum Family {
    Vertex(Arc<dyn VertexWeights>),
    Spin(Arc<dyn SpinWeights>),
    Irf(Arc<dyn IrfWeights>),
    IrfVertex(Arc<dyn IrfVertexWeights>),
    CheckerboardVertex(Checkerboard<Arc<dyn VertexWeights>>),
    CheckerboardIrf(Checkerboard<Arc<dyn IrfWeights>>),
    CheckerboardIrfVertex(Checkerboard<Arc<dyn IrfVertexWeights>>),
}

pub struct LoadedWeights {
    pub file: WeightFile,
    pub family: Family,
    pub form: RapidityForm,
}

fn schema(msg: impl Into<String>) -> YbxError {
    YbxError::Schema(msg.into())
}

fn finite(z: Complex64, at: &str) -> Result<Complex64, YbxError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(YbxError::NonFinite(at.to_string()))
    }
}

fn is_leaf(v: &Value) -> bool {
    match v {
        Value::String(_) | Value::Number(_) => true,
        Value::Array(a) => a.len() == 2 && a.iter().all(Value::is_number),
        _ => false,
    }
}

/// Reads a nested array of complex leaves into a tensor.
pub fn tensor_from_json(v: &Value, what: &str) -> Result<DenseTensor, YbxError> {
    fn walk(v: &Value, depth: usize, shape: &mut Vec<usize>, out: &mut Vec<Complex64>, what: &str) -> Result<(), YbxError> {
        if is_leaf(v) {
            if depth != shape.len() {
                return Err(schema(format!("{what}: ragged nesting")));
            }
            let at = format!("{what} entry {}", out.len() + 1);
            out.push(finite(complex_from_json(v)?, &at)?);
            return Ok(());
        }
        let Value::Array(items) = v else {
            return Err(schema(format!("{what}: expected nested arrays of complex numbers")));
        };
        if depth == shape.len() {
            if !out.is_empty() {
                return Err(schema(format!("{what}: ragged nesting")));
            }
            shape.push(items.len());
        } else if shape[depth] != items.len() {
            return Err(YbxError::Extent {
                what: format!("{what} (axis {})", depth + 1),
                expected: vec![shape[depth]],
                got: vec![items.len()],
            });
        }
        for item in items {
            walk(item, depth + 1, shape, out, what)?;
        }
        Ok(())
    }
    let mut shape = Vec::new();
    let mut data = Vec::new();
    walk(v, 0, &mut shape, &mut data, what)?;
    if shape.is_empty() {
        return Err(schema(format!("{what}: expected an array, got a single number")));
    }
    DenseTensor::new(shape, data).map_err(|e| schema(format!("{what}: {e}")))
}

/// Writes a tensor as nested arrays of `[re, im]`.
pub fn tensor_to_json(t: &DenseTensor) -> Value {
    fn build(t: &DenseTensor, axis: usize, offset: usize, stride: usize) -> Value {
        let ext = t.extents();
        if axis == ext.len() {
            return complex_to_json(t.data()[offset]);
        }
        let inner = stride / ext[axis];
        Value::Array((0..ext[axis]).map(|k| build(t, axis + 1, offset + k * inner, inner)).collect())
    }
    build(t, 0, 0, t.len())
}

pub fn rapidity_from_json(v: &Value) -> Result<Rapidity, YbxError> {
    if let Value::Object(m) = v {
        let pair = m.get("pair").and_then(Value::as_array).filter(|a| a.len() == 2 && m.len() == 1);
        let Some(pair) = pair else {
            return Err(schema("rapidity object must be {\"pair\": [p1, p2]}"));
        };
        let a = finite(complex_from_json(&pair[0])?, "rapidity")?;
        let b = finite(complex_from_json(&pair[1])?, "rapidity")?;
        return Ok(Rapidity::Pair(a, b));
    }
    if is_leaf(v) {
        return Ok(Rapidity::Scalar(finite(complex_from_json(v)?, "rapidity")?));
    }
    let Value::Array(items) = v else {
        return Err(schema("rapidity must be a complex number, a component array, or {\"pair\": ...}"));
    };
    if items.len() % 2 == 0 {
        return Err(schema(format!("vector rapidity needs an odd number of components, got {}", items.len())));
    }
    let comps = items
        .iter()
        .enumerate()
        .map(|(k, x)| finite(complex_from_json(x)?, &format!("rapidity component {}", k + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Rapidity::Vector(comps))
}

pub fn rapidity_to_json(r: &Rapidity) -> Value {
    match r {
        Rapidity::Scalar(z) => complex_to_json(*z),
        Rapidity::Vector(v) => Value::Array(v.iter().map(|z| complex_to_json(*z)).collect()),
        Rapidity::Pair(a, b) => json!({ "pair": [complex_to_json(*a), complex_to_json(*b)] }),
    }
}

fn expect_extents(t: &DenseTensor, expected: &[usize], what: &str) -> Result<(), YbxError> {
    if t.extents() != expected {
        return Err(YbxError::Extent { what: what.to_string(), expected: expected.to_vec(), got: t.extents().to_vec() });
    }
    Ok(())
}

fn field<'a>(data: &'a Value, key: &str, kind: WeightKind) -> Result<&'a Value, YbxError> {
    data.get(key).ok_or_else(|| schema(format!("{} table needs a `{key}` entry", kind.name())))
}

fn slmn_params(file: &WeightFile, raw: &Value) -> Result<SlmnParams, YbxError> {
    let p: SlmnFileParams =
        serde_json::from_value(raw.clone()).map_err(|e| schema(format!("slmn params: {e}")))?;
    let q = p.m + p.n;
    if q != file.q {
        return Err(YbxError::Extent { what: "slmn states m+n".into(), expected: vec![file.q], got: vec![q] });
    }
    let mut params = SlmnParams::new(p.m, p.n, finite(complex_from_json(&p.eta)?, "eta")?);
    if let Some(rows) = &p.g {
        if rows.len() != q || rows.iter().any(|r| r.len() != q) {
            let got = vec![rows.len(), rows.first().map_or(0, Vec::len)];
            return Err(YbxError::Extent { what: "G".into(), expected: vec![q, q], got });
        }
        let mut g = Vec::with_capacity(q * q);
        for (i, row) in rows.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                g.push(finite(complex_from_json(x)?, &format!("G[{}][{}]", i + 1, j + 1))?);
            }
        }
        params = params.with_g(g);
    }
    match (&p.norm, &p.norm_over_sinh) {
        (Some(_), Some(_)) => return Err(schema("give at most one of `norm` and `norm_over_sinh`")),
        (Some(n), None) => params = params.with_norm(Normalization::Constant(finite(complex_from_json(n)?, "norm")?)),
        (None, Some(n)) => {
            params = params.with_norm(Normalization::OverSinhDifference(finite(complex_from_json(n)?, "norm_over_sinh")?))
        }
        (None, None) => {}
    }
    if let Some(eps) = p.epsilon {
        params = params.with_epsilon(eps);
    }
    if let Some(e) = params.validate().into_iter().next() {
        return Err(e.into());
    }
    Ok(params)
}

fn potts_params(raw: &Value) -> Result<PottsParams, YbxError> {
    let p: PottsFileParams = serde_json::from_value(raw.clone()).map_err(|e| schema(format!("potts params: {e}")))?;
    let mut params = PottsParams::new(p.n)?;
    if let Some(c) = p.c {
        params = params.with_c(c);
    }
    Ok(params)
}

fn check_states(file: &WeightFile, got: usize, what: &str) -> Result<(), YbxError> {
    if got != file.q {
        return Err(YbxError::Extent { what: what.to_string(), expected: vec![file.q], got: vec![got] });
    }
    Ok(())
}

fn build_builtin(file: &WeightFile, b: &Builtin) -> Result<(Family, RapidityForm), YbxError> {
    match (b.name.as_str(), file.kind) {
        ("slmn", WeightKind::Vertex) => {
            let params = slmn_params(file, &b.params)?;
            Ok((Family::Vertex(Arc::new(slmn_vertex_weight(params)?)), RapidityForm::Vector(file.q)))
        }
        ("slmn", WeightKind::CheckerboardVertex) => {
            let params = slmn_params(file, &b.params)?;
            let plain: Arc<dyn VertexWeights> = Arc::new(slmn_vertex_weight(params.clone())?);
            let barred: Arc<dyn VertexWeights> = Arc::new(slmn_vertex_weight(params)?);
            Ok((Family::CheckerboardVertex(Checkerboard { plain, barred }), RapidityForm::Vector(file.q)))
        }
        ("potts", kind) => {
            let spin = potts_spin_weights(potts_params(&b.params)?)?;
            check_states(file, spin.states(), "potts states N")?;
            let family = match kind {
                WeightKind::Spin => Family::Spin(Arc::new(spin)),
                WeightKind::Vertex => return Ok((Family::Vertex(Arc::new(square_weight_compose(spin))), RapidityForm::Pair)),
                WeightKind::CheckerboardIrf => {
                    let cb = embed_spin_as_checkerboard_irf(spin);
                    Family::CheckerboardIrf(Checkerboard { plain: Arc::new(cb.plain), barred: Arc::new(cb.barred) })
                }
                WeightKind::CheckerboardIrfVertex => {
                    let cb = embed_spin_as_checkerboard_irf(spin);
                    Family::CheckerboardIrfVertex(Checkerboard {
                        plain: Arc::new(irf_as_irf_vertex(cb.plain)),
                        barred: Arc::new(irf_as_irf_vertex(cb.barred)),
                    })
                }
                WeightKind::CheckerboardVertex => {
                    let cb = embed_spin_as_checkerboard_irf(spin);
                    Family::CheckerboardVertex(Checkerboard {
                        plain: Arc::new(irf_vertex_to_vertex(irf_as_irf_vertex(cb.plain))),
                        barred: Arc::new(irf_vertex_to_vertex(irf_as_irf_vertex(cb.barred))),
                    })
                }
                other => return Err(schema(format!("builtin potts has no {} form", other.name()))),
            };
            Ok((family, RapidityForm::Scalar))
        }
        ("slmn", other) => Err(schema(format!("builtin slmn has no {} form", other.name()))),
        (name, _) => Err(schema(format!("unknown builtin `{name}` (expected slmn or potts)"))),
    }
}

fn colours(t: &DenseTensor, offset: usize, what: &str) -> Result<(usize, usize), YbxError> {
    let e = &t.extents()[offset..];
    if e.len() != 4 || e[0] != e[2] || e[1] != e[3] {
        return Err(YbxError::Extent {
            what: format!("{what} face axes"),
            expected: vec![e.first().copied().unwrap_or(0), e.get(1).copied().unwrap_or(0), e.first().copied().unwrap_or(0), e.get(1).copied().unwrap_or(0)],
            got: e.to_vec(),
        });
    }
    Ok((e[0], e[1]))
}

fn build_table(file: &WeightFile, t: &Table) -> Result<Family, YbxError> {
    rapidity_from_json(&t.p)?;
    rapidity_from_json(&t.q)?;
    let q = file.q;
    let faces = || file.qf.ok_or_else(|| schema(format!("{} table needs `Qf`", file.kind.name())));
    let data = &t.data;
    let family = match file.kind {
        WeightKind::Vertex => {
            let w = tensor_from_json(data, "data")?;
            expect_extents(&w, &[q; 4], "vertex data")?;
            Family::Vertex(Arc::new(TableVertex::new(w)?))
        }
        WeightKind::Spin => {
            let w = tensor_from_json(field(data, "w", file.kind)?, "w")?;
            let wbar = tensor_from_json(field(data, "wbar", file.kind)?, "wbar")?;
            expect_extents(&w, &[q, q], "w")?;
            expect_extents(&wbar, &[q, q], "wbar")?;
            Family::Spin(Arc::new(TableSpin::new(w, wbar)?))
        }
        WeightKind::Irf => {
            let w = tensor_from_json(data, "data")?;
            expect_extents(&w, &[q; 4], "irf data")?;
            Family::Irf(Arc::new(TableIrf::new(w)?))
        }
        WeightKind::IrfVertex => {
            let f = faces()?;
            let w = tensor_from_json(data, "data")?;
            expect_extents(&w, &[q, q, q, q, f, f, f, f], "irf-vertex data")?;
            Family::IrfVertex(Arc::new(TableIrfVertex::new(w)?))
        }
        WeightKind::CheckerboardVertex => {
            let plain = tensor_from_json(field(data, "plain", file.kind)?, "plain")?;
            let barred = tensor_from_json(field(data, "barred", file.kind)?, "barred")?;
            expect_extents(&plain, &[q; 4], "plain")?;
            expect_extents(&barred, &[q; 4], "barred")?;
            Family::CheckerboardVertex(Checkerboard {
                plain: Arc::new(TableVertex::new(plain)?),
                barred: Arc::new(TableVertex::new(barred)?),
            })
        }
        WeightKind::CheckerboardIrf => {
            let plain = tensor_from_json(field(data, "plain", file.kind)?, "plain")?;
            let barred = tensor_from_json(field(data, "barred", file.kind)?, "barred")?;
            let (na, nb) = colours(&plain, 0, "plain")?;
            expect_extents(&barred, &[nb, na, nb, na], "barred")?;
            check_states(file, na.max(nb), "largest face extent")?;
            Family::CheckerboardIrf(Checkerboard {
                plain: Arc::new(TableIrf::new(plain)?),
                barred: Arc::new(TableIrf::new(barred)?),
            })
        }
        WeightKind::CheckerboardIrfVertex => {
            let f = faces()?;
            let plain = tensor_from_json(field(data, "plain", file.kind)?, "plain")?;
            let barred = tensor_from_json(field(data, "barred", file.kind)?, "barred")?;
            if plain.rank() != 8 {
                return Err(YbxError::Extent { what: "plain rank".into(), expected: vec![8], got: vec![plain.rank()] });
            }
            let (na, nb) = colours(&plain, 4, "plain")?;
            expect_extents(&plain, &[q, q, q, q, na, nb, na, nb], "plain")?;
            expect_extents(&barred, &[q, q, q, q, nb, na, nb, na], "barred")?;
            if na.max(nb) != f {
                return Err(YbxError::Extent { what: "largest face extent".into(), expected: vec![f], got: vec![na.max(nb)] });
            }
            Family::CheckerboardIrfVertex(Checkerboard {
                plain: Arc::new(TableIrfVertex::new(plain)?),
                barred: Arc::new(TableIrfVertex::new(barred)?),
            })
        }
    };
    Ok(family)
}

impl WeightFile {
    pub fn build(&self) -> Result<LoadedWeights, YbxError> {
        let (family, form) = match &self.source {
            Source::Builtin(b) => build_builtin(self, b)?,
            Source::Table(t) => (build_table(self, t)?, RapidityForm::Scalar),
        };
        Ok(LoadedWeights { file: self.clone(), family, form })
    }

    /// Builtin sl(m|n) vertex family.
    pub fn slmn(params: &SlmnParams) -> Self {
        let mut p = Map::new();
        p.insert("m".into(), json!(params.m));
        p.insert("n".into(), json!(params.n));
        p.insert("eta".into(), complex_to_json(params.eta));
        let q = params.states();
        let g: Vec<Value> =
            (0..q).map(|i| Value::Array((0..q).map(|j| complex_to_json(params.g[i * q + j])).collect())).collect();
        p.insert("G".into(), Value::Array(g));
        match params.norm {
            Normalization::Constant(z) => p.insert("norm".into(), complex_to_json(z)),
            Normalization::OverSinhDifference(z) => p.insert("norm_over_sinh".into(), complex_to_json(z)),
        };
        p.insert("epsilon".into(), json!(params.epsilon));
        Self {
            kind: WeightKind::Vertex,
            q,
            qf: None,
            source: Source::Builtin(Builtin { name: "slmn".into(), params: Value::Object(p) }),
        }
    }

    /// Builtin Potts family in the given form.
    pub fn potts(states: usize, kind: WeightKind) -> Self {
        Self {
            kind,
            q: states,
            qf: None,
            source: Source::Builtin(Builtin { name: "potts".into(), params: json!({ "N": states as f64 }) }),
        }
    }
}

pub fn parse_weight_file(text: &str, path: &Path) -> Result<WeightFile, YbxError> {
    let value: Value = serde_json::from_str(text).map_err(|e| YbxError::Json { path: path.to_path_buf(), source: e })?;
    serde_json::from_value(value).map_err(|e| schema(format!("{}: {e}", path.display())))
}

pub fn load_weight_file(path: &Path) -> Result<LoadedWeights, YbxError> {
    let text = fs::read_to_string(path).map_err(|e| YbxError::Io { path: path.to_path_buf(), source: e })?;
    parse_weight_file(&text, path)?.build()
}

pub fn save_weight_file(file: &WeightFile, path: &Path) -> Result<(), YbxError> {
    let text = weight_file_to_string(file)?;
    fs::write(path, text).map_err(|e| YbxError::Io { path: path.to_path_buf(), source: e })
}

pub fn weight_file_to_string(file: &WeightFile) -> Result<String, YbxError> {
    // reject anything that would not load back
    file.build()?;
    let mut s = serde_json::to_string_pretty(file).map_err(|e| schema(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Tabulates a loaded family at one rapidity pair.
pub fn tabulate(w: &LoadedWeights, p: &Rapidity, q: &Rapidity) -> Result<WeightFile, YbxError> {
    tabulate_family(&w.family, p, q)
}

pub fn tabulate_family(family: &Family, p: &Rapidity, q: &Rapidity) -> Result<WeightFile, YbxError> {
    let pair = |a: &DenseTensor, b: &DenseTensor, ka: &str, kb: &str| {
        let mut m = Map::new();
        m.insert(ka.into(), tensor_to_json(a));
        m.insert(kb.into(), tensor_to_json(b));
        Value::Object(m)
    };
    let (data, qf) = match family {
        Family::Vertex(f) => (tensor_to_json(&f.eval(p, q)?), None),
        Family::Spin(f) => (pair(&f.eval_w(p, q)?, &f.eval_wbar(p, q)?, "w", "wbar"), None),
        Family::Irf(f) => (tensor_to_json(&f.eval(p, q)?), None),
        Family::IrfVertex(f) => (tensor_to_json(&f.eval(p, q)?), Some(f.face_extents()[0])),
        Family::CheckerboardVertex(cb) => (pair(&cb.plain.eval(p, q)?, &cb.barred.eval(p, q)?, "plain", "barred"), None),
        Family::CheckerboardIrf(cb) => (pair(&cb.plain.eval(p, q)?, &cb.barred.eval(p, q)?, "plain", "barred"), None),
        Family::CheckerboardIrfVertex(cb) => {
            let e = cb.plain.face_extents();
            (pair(&cb.plain.eval(p, q)?, &cb.barred.eval(p, q)?, "plain", "barred"), Some(e[0].max(e[1])))
        }
    };
    Ok(WeightFile {
        kind: family.kind(),
        q: family_states(family),
        qf,
        source: Source::Table(Table { p: rapidity_to_json(p), q: rapidity_to_json(q), data }),
    })
}

impl Family {
    pub fn kind(&self) -> WeightKind {
        match self {
            Family::Vertex(_) => WeightKind::Vertex,
            Family::Spin(_) => WeightKind::Spin,
            Family::Irf(_) => WeightKind::Irf,
            Family::IrfVertex(_) => WeightKind::IrfVertex,
            Family::CheckerboardVertex(_) => WeightKind::CheckerboardVertex,
            Family::CheckerboardIrf(_) => WeightKind::CheckerboardIrf,
            Family::CheckerboardIrfVertex(_) => WeightKind::CheckerboardIrfVertex,
        }
    }
}

/// The `Q` a file for this family declares.
pub fn family_states(f: &Family) -> usize {
    match f {
        Family::Vertex(w) => w.states(),
        Family::Spin(w) => w.states(),
        Family::Irf(w) => w.face_extents()[0],
        Family::IrfVertex(w) => w.edge_states(),
        Family::CheckerboardVertex(cb) => cb.plain.states(),
        Family::CheckerboardIrf(cb) => {
            let e = cb.plain.face_extents();
            e[0].max(e[1])
        }
        Family::CheckerboardIrfVertex(cb) => cb.plain.edge_states(),
    }
}

/// Non-mutating diagnostics for a weight file: parse problems and, for the
/// sl(m|n) builtin, the `G` and sign invariants.
pub fn validate_weight_file(file: &WeightFile) -> Vec<String> {
    let mut out = Vec::new();
    if let Source::Builtin(b) = &file.source {
        if b.name == "slmn" {
            if let Ok(p) = serde_json::from_value::<SlmnFileParams>(b.params.clone()) {
                let mut params = SlmnParams::new(p.m, p.n, Complex64::new(0.0, 0.0));
                if let Some(eta) = p.eta.as_array().and_then(|_| complex_from_json(&p.eta).ok()) {
                    params.eta = eta;
                }
                if let Some(rows) = p.g.as_ref() {
                    let flat: Result<Vec<_>, _> = rows.iter().flatten().map(complex_from_json).collect();
                    if let Ok(g) = flat {
                        params.g = g;
                    }
                }
                if let Some(eps) = p.epsilon {
                    params.epsilon = eps;
                }
                let q = params.states();
                let probe = Rapidity::trivial_gauge(Complex64::new(0.3, 0.0), q);
                out.extend(validate_slmn(&params, &probe, &probe).into_iter().map(|e| e.to_string()));
            }
        }
    }
    if let Err(e) = file.build() {
        let msg = e.to_string();
        if !out.contains(&msg) {
            out.push(msg);
        }
    }
    out
}
