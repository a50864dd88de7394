//! JSON file formats.
//!
//! One shared convention: points are named by labels, label order is file
//! order, and infinite numbers are written as the string `"inf"`. Numbers
//! are written with the shortest representation that reads back exactly.
//!
//! ```text
//! space     {"points": ["a", "b"], "cost": [[0, 1], ["inf", 0]]}      cost optional
//! measure   {"mass": {"a": 0.25, "b": 0.75}}                          missing labels have mass 0
//! coupling  {"joint": [[0.25, 0], [0.5, 0.25]]}                       rows: source points
//! kernel    {"rows": [[1, 0], [0.5, 0.5]]}
//! map       {"domain": space, "codomain": space, "map": {"x": "y"}}
//! lens      {"domain": space, "codomain": space,
//!            "project": {"x": "y"}, "lift": [["x", "y", "x'"], ...]}
//! category  {"objects": ["A"], "morphisms": [{"name": "f", "source": "A", "target": "A", "weight": 0}],
//!            "identities": {"A": "f"}, "composition": [["f", "f", "f"]]}   f then g = h
//! functor   {"objects": {"A": "B"}, "morphisms": {"f": "g"}}
//! dagger    {"dagger": {"f": "f"}}
//! ```
//!
//! Coupling and kernel files may also name their points with optional
//! `"source"` and `"target"` label lists, which must then match the spaces
//! they are read against.

use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::Array2;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::lens::SetLens;
use crate::prob::{Coupling, FiniteSpace, Kernel, Measure, PointMap};
use crate::report::LawReport;
use crate::wcat::{FinFunctor, FinWeightedCategory, Morphism, PQMetric};

fn parse_err(e: impl std::fmt::Display) -> Error {
    Error::Parse(e.to_string())
}

fn num_value(v: &Value, what: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::Parse(format!("{what}: {n} is not a float"))),
        Value::String(s) if s == "inf" => Ok(f64::INFINITY),
        other => Err(Error::Parse(format!("{what}: expected a number or \"inf\", found {other}"))),
    }
}

/// `inf` becomes `"inf"`; other values are plain JSON numbers.
pub fn num_to_value(x: f64) -> Value {
    if x == f64::INFINITY {
        Value::String("inf".into())
    } else {
        serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
    }
}

fn matrix(v: &Value, rows: usize, cols: usize, what: &str) -> Result<Array2<f64>> {
    let outer = v.as_array().ok_or_else(|| Error::Parse(format!("{what}: expected a list of rows")))?;
    if outer.len() != rows {
        return Err(Error::Structural(format!("{what}: {} rows, expected {rows}", outer.len())));
    }
    let mut m = Array2::zeros((rows, cols));
    for (i, row) in outer.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| Error::Parse(format!("{what}: row {i} is not a list")))?;
        if row.len() != cols {
            return Err(Error::Structural(format!("{what}: row {i} has {} entries, expected {cols}", row.len())));
        }
        for (j, x) in row.iter().enumerate() {
            m[[i, j]] = num_value(x, &format!("{what} ({i}, {j})"))?;
        }
    }
    Ok(m)
}

fn matrix_value(m: &Array2<f64>) -> Value {
    Value::Array(m.rows().into_iter().map(|r| Value::Array(r.iter().map(|&x| num_to_value(x)).collect())).collect())
}

fn object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::Parse(format!("{what}: expected an object")))
}

fn only_keys(obj: &Map<String, Value>, allowed: &[&str], what: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::Parse(format!("{what}: unknown field {k:?}"))),
        None => Ok(()),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, what: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::Parse(format!("{what}: missing field {key:?}")))
}

fn label<'a>(v: &'a Value, what: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::Parse(format!("{what}: expected a label, found {v}")))
}

fn index(space: &FiniteSpace<f64>, l: &str, what: &str) -> Result<usize> {
    space.index_of(l).ok_or_else(|| Error::Structural(format!("{what}: unknown point {l:?}")))
}

fn from_str(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(parse_err)
}

fn check_labels(obj: &Map<String, Value>, key: &str, space: &FiniteSpace<f64>, what: &str) -> Result<()> {
    if let Some(v) = obj.get(key) {
        let labels: Vec<String> = serde_json::from_value(v.clone()).map_err(parse_err)?;
        if labels != space.labels() {
            return Err(Error::Structural(format!("{what}: {key} labels {labels:?} differ from {:?}", space.labels())));
        }
    }
    Ok(())
}

// ---- spaces ----

fn space_from_value(v: &Value, what: &str) -> Result<FiniteSpace<f64>> {
    let obj = object(v, what)?;
    only_keys(obj, &["points", "cost"], what)?;
    let points: Vec<String> = serde_json::from_value(field(obj, "points", what)?.clone()).map_err(parse_err)?;
    match obj.get("cost") {
        None | Some(Value::Null) => FiniteSpace::new(points),
        Some(c) => {
            let n = points.len();
            FiniteSpace::with_cost(points, matrix(c, n, n, &format!("{what} cost"))?)
        }
    }
}

pub fn space_value(s: &FiniteSpace<f64>) -> Value {
    let mut obj = Map::new();
    obj.insert("points".into(), Value::from(s.labels().to_vec()));
    if let Some(c) = s.cost() {
        obj.insert("cost".into(), matrix_value(c));
    }
    Value::Object(obj)
}

pub fn parse_space(text: &str) -> Result<FiniteSpace<f64>> {
    space_from_value(&from_str(text)?, "space")
}

/// A pq-metric space written in the space format.
pub fn pq_metric_value(m: &PQMetric<f64>) -> Value {
    let mut obj = Map::new();
    obj.insert("points".into(), Value::from(m.points().to_vec()));
    obj.insert("cost".into(), matrix_value(m.dist()));
    Value::Object(obj)
}

// ---- measures, couplings, kernels ----

pub fn parse_measure(text: &str, space: &Arc<FiniteSpace<f64>>) -> Result<Measure<f64>> {
    let v = from_str(text)?;
    let obj = object(&v, "measure")?;
    only_keys(obj, &["mass"], "measure")?;
    let mass_obj = object(field(obj, "mass", "measure")?, "measure mass")?;
    let mut mass = vec![0.0; space.len()];
    for (l, x) in mass_obj {
        mass[index(space, l, "measure")?] = num_value(x, &format!("mass of {l:?}"))?;
    }
    Measure::new(space.clone(), mass)
}

pub fn measure_value(p: &Measure<f64>) -> Value {
    let mass: Map<String, Value> = p.space().labels().iter().zip(p.mass().iter()).map(|(l, &m)| (l.clone(), num_to_value(m))).collect();
    let mut obj = Map::new();
    obj.insert("mass".into(), Value::Object(mass));
    Value::Object(obj)
}

pub fn parse_coupling(text: &str, source: &Arc<FiniteSpace<f64>>, target: &Arc<FiniteSpace<f64>>) -> Result<Coupling<f64>> {
    let v = from_str(text)?;
    let obj = object(&v, "coupling")?;
    only_keys(obj, &["joint", "source", "target"], "coupling")?;
    check_labels(obj, "source", source, "coupling")?;
    check_labels(obj, "target", target, "coupling")?;
    let joint = matrix(field(obj, "joint", "coupling")?, source.len(), target.len(), "coupling joint")?;
    Coupling::from_joint(source.clone(), target.clone(), joint)
}

pub fn coupling_value(s: &Coupling<f64>) -> Value {
    let mut obj = Map::new();
    obj.insert("source".into(), Value::from(s.source().space().labels().to_vec()));
    obj.insert("target".into(), Value::from(s.target().space().labels().to_vec()));
    obj.insert("joint".into(), matrix_value(s.joint()));
    Value::Object(obj)
}

pub fn parse_kernel(text: &str, source: &Arc<FiniteSpace<f64>>, target: &Arc<FiniteSpace<f64>>) -> Result<Kernel<f64>> {
    let v = from_str(text)?;
    let obj = object(&v, "kernel")?;
    only_keys(obj, &["rows", "source", "target"], "kernel")?;
    check_labels(obj, "source", source, "kernel")?;
    check_labels(obj, "target", target, "kernel")?;
    let rows = matrix(field(obj, "rows", "kernel")?, source.len(), target.len(), "kernel rows")?;
    Kernel::new(source.clone(), target.clone(), rows)
}

pub fn kernel_value(k: &Kernel<f64>) -> Value {
    let mut obj = Map::new();
    obj.insert("source".into(), Value::from(k.source().labels().to_vec()));
    obj.insert("target".into(), Value::from(k.target().labels().to_vec()));
    obj.insert("rows".into(), matrix_value(k.rows()));
    Value::Object(obj)
}

// ---- maps and lenses ----

fn table(obj: &Map<String, Value>, key: &str, domain: &FiniteSpace<f64>, codomain: &FiniteSpace<f64>, what: &str) -> Result<Vec<usize>> {
    let map = object(field(obj, key, what)?, what)?;
    let mut t = vec![usize::MAX; domain.len()];
    for (x, y) in map {
        let i = index(domain, x, what)?;
        t[i] = index(codomain, label(y, what)?, what)?;
    }
    if let Some(i) = t.iter().position(|&y| y == usize::MAX) {
        return Err(Error::Structural(format!("{what}: no image for {:?}", domain.labels()[i])));
    }
    Ok(t)
}

fn table_value(t: &[usize], domain: &FiniteSpace<f64>, codomain: &FiniteSpace<f64>) -> Value {
    Value::Object(t.iter().enumerate().map(|(x, &y)| (domain.labels()[x].clone(), Value::from(codomain.labels()[y].clone()))).collect())
}

pub fn parse_point_map(text: &str) -> Result<PointMap<f64>> {
    let v = from_str(text)?;
    let obj = object(&v, "map")?;
    only_keys(obj, &["domain", "codomain", "map"], "map")?;
    let domain = Arc::new(space_from_value(field(obj, "domain", "map")?, "map domain")?);
    let codomain = Arc::new(space_from_value(field(obj, "codomain", "map")?, "map codomain")?);
    let t = table(obj, "map", &domain, &codomain, "map")?;
    PointMap::new(domain, codomain, t)
}

pub fn point_map_value(f: &PointMap<f64>) -> Value {
    let mut obj = Map::new();
    obj.insert("domain".into(), space_value(f.domain()));
    obj.insert("codomain".into(), space_value(f.codomain()));
    obj.insert("map".into(), table_value(f.table(), f.domain(), f.codomain()));
    Value::Object(obj)
}

pub fn parse_lens(text: &str) -> Result<SetLens<f64>> {
    let v = from_str(text)?;
    let obj = object(&v, "lens")?;
    only_keys(obj, &["domain", "codomain", "project", "lift"], "lens")?;
    let domain = Arc::new(space_from_value(field(obj, "domain", "lens")?, "lens domain")?);
    let codomain = Arc::new(space_from_value(field(obj, "codomain", "lens")?, "lens codomain")?);
    let project = table(obj, "project", &domain, &codomain, "lens project")?;
    let (nx, ny) = (domain.len(), codomain.len());
    let mut lift = vec![usize::MAX; nx * ny];
    let triples = field(obj, "lift", "lens")?.as_array().ok_or_else(|| Error::Parse("lens lift: expected a list of triples".into()))?;
    for t in triples {
        let t = t.as_array().filter(|t| t.len() == 3).ok_or_else(|| Error::Parse(format!("lens lift: {t} is not a triple")))?;
        let x = index(&domain, label(&t[0], "lens lift")?, "lens lift")?;
        let y = index(&codomain, label(&t[1], "lens lift")?, "lens lift")?;
        let x2 = index(&domain, label(&t[2], "lens lift")?, "lens lift")?;
        if lift[x * ny + y] != usize::MAX {
            return Err(Error::Structural(format!("lens lift: ({:?}, {:?}) given twice", domain.labels()[x], codomain.labels()[y])));
        }
        lift[x * ny + y] = x2;
    }
    if let Some(i) = lift.iter().position(|&x| x == usize::MAX) {
        return Err(Error::Structural(format!("lens lift: no entry for ({:?}, {:?})", domain.labels()[i / ny], codomain.labels()[i % ny])));
    }
    SetLens::new(domain, codomain, project, lift)
}

pub fn lens_value(l: &SetLens<f64>) -> Value {
    let (d, c) = (l.domain(), l.codomain());
    let mut lift = Vec::new();
    for x in 0..d.len() {
        for y in 0..c.len() {
            lift.push(Value::from(vec![d.labels()[x].clone(), c.labels()[y].clone(), d.labels()[l.lift(x, y)].clone()]));
        }
    }
    let mut obj = Map::new();
    obj.insert("domain".into(), space_value(d));
    obj.insert("codomain".into(), space_value(c));
    obj.insert("project".into(), table_value(l.projection().table(), d, c));
    obj.insert("lift".into(), Value::Array(lift));
    Value::Object(obj)
}

// ---- categories ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MorphismFile {
    name: String,
    source: String,
    target: String,
    weight: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CategoryFile {
    objects: Vec<String>,
    morphisms: Vec<MorphismFile>,
    identities: Map<String, Value>,
    composition: Vec<(String, String, String)>,
}

fn position(names: &[String], n: &str, what: &str) -> Result<usize> {
    names.iter().position(|x| x == n).ok_or_else(|| Error::Structural(format!("{what}: unknown name {n:?}")))
}

pub fn parse_category(text: &str) -> Result<FinWeightedCategory<f64>> {
    let file: CategoryFile = serde_json::from_str(text).map_err(parse_err)?;
    let names: Vec<String> = file.morphisms.iter().map(|m| m.name.clone()).collect();
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(Error::Structural(format!("category: duplicate morphism {n:?}")));
        }
    }
    let mut morphisms = Vec::with_capacity(names.len());
    for m in &file.morphisms {
        morphisms.push(Morphism {
            name: m.name.clone(),
            source: position(&file.objects, &m.source, "category morphism source")?,
            target: position(&file.objects, &m.target, "category morphism target")?,
            weight: num_value(&m.weight, &format!("weight of {:?}", m.name))?,
        });
    }
    let mut identity = vec![usize::MAX; file.objects.len()];
    for (o, f) in &file.identities {
        let i = position(&file.objects, o, "category identities")?;
        identity[i] = position(&names, label(f, "category identities")?, "category identities")?;
    }
    if let Some(i) = identity.iter().position(|&f| f == usize::MAX) {
        return Err(Error::Structural(format!("category: no identity for {:?}", file.objects[i])));
    }
    let mut composition = BTreeMap::new();
    for (f, g, h) in &file.composition {
        let key = (position(&names, f, "category composition")?, position(&names, g, "category composition")?);
        let h = position(&names, h, "category composition")?;
        if composition.insert(key, h).is_some() {
            return Err(Error::Structural(format!("category: composite of {f:?} then {g:?} given twice")));
        }
    }
    FinWeightedCategory::new(file.objects, morphisms, identity, composition)
}

pub fn category_value(c: &FinWeightedCategory<f64>) -> Value {
    let name = |f: usize| c.morphisms()[f].name.clone();
    let morphisms: Vec<Value> = c
        .morphisms()
        .iter()
        .map(|m| {
            let mut obj = Map::new();
            obj.insert("name".into(), Value::from(m.name.clone()));
            obj.insert("source".into(), Value::from(c.objects()[m.source].clone()));
            obj.insert("target".into(), Value::from(c.objects()[m.target].clone()));
            obj.insert("weight".into(), num_to_value(m.weight));
            Value::Object(obj)
        })
        .collect();
    let identities: Map<String, Value> = c.objects().iter().zip(c.identities()).map(|(o, &f)| (o.clone(), Value::from(name(f)))).collect();
    let composition: Vec<Value> = c.composition_table().iter().map(|(&(f, g), &h)| Value::from(vec![name(f), name(g), name(h)])).collect();
    let mut obj = Map::new();
    obj.insert("objects".into(), Value::from(c.objects().to_vec()));
    obj.insert("morphisms".into(), Value::Array(morphisms));
    obj.insert("identities".into(), Value::Object(identities));
    obj.insert("composition".into(), Value::Array(composition));
    Value::Object(obj)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctorFile {
    objects: BTreeMap<String, String>,
    morphisms: BTreeMap<String, String>,
}

pub fn parse_functor(text: &str, c: &FinWeightedCategory<f64>, d: &FinWeightedCategory<f64>) -> Result<FinFunctor> {
    let file: FunctorFile = serde_json::from_str(text).map_err(parse_err)?;
    let c_names: Vec<String> = c.morphisms().iter().map(|m| m.name.clone()).collect();
    let d_names: Vec<String> = d.morphisms().iter().map(|m| m.name.clone()).collect();
    let mut objects = vec![usize::MAX; c.objects().len()];
    for (a, b) in &file.objects {
        objects[position(c.objects(), a, "functor objects")?] = position(d.objects(), b, "functor objects")?;
    }
    let mut morphisms = vec![usize::MAX; c_names.len()];
    for (f, g) in &file.morphisms {
        morphisms[position(&c_names, f, "functor morphisms")?] = position(&d_names, g, "functor morphisms")?;
    }
    if let Some(i) = objects.iter().position(|&o| o == usize::MAX) {
        return Err(Error::Structural(format!("functor: no image for object {:?}", c.objects()[i])));
    }
    if let Some(i) = morphisms.iter().position(|&m| m == usize::MAX) {
        return Err(Error::Structural(format!("functor: no image for morphism {:?}", c_names[i])));
    }
    Ok(FinFunctor { objects, morphisms })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DaggerFile {
    dagger: BTreeMap<String, String>,
}

pub fn parse_dagger(text: &str, c: &FinWeightedCategory<f64>) -> Result<Vec<usize>> {
    let file: DaggerFile = serde_json::from_str(text).map_err(parse_err)?;
    let names: Vec<String> = c.morphisms().iter().map(|m| m.name.clone()).collect();
    let mut table = vec![usize::MAX; names.len()];
    for (f, g) in &file.dagger {
        table[position(&names, f, "dagger")?] = position(&names, g, "dagger")?;
    }
    if let Some(i) = table.iter().position(|&m| m == usize::MAX) {
        return Err(Error::Structural(format!("dagger: no image for {:?}", names[i])));
    }
    Ok(table)
}

// ---- reports ----

pub fn report_value(r: &LawReport) -> Value {
    let violations: Vec<Value> = r
        .violations()
        .iter()
        .map(|v| {
            let mut obj = Map::new();
            obj.insert("law".into(), Value::from(v.law.clone()));
            obj.insert("witness".into(), Value::from(v.witness.clone()));
            obj.insert("lhs".into(), num_to_value(v.lhs));
            obj.insert("rhs".into(), num_to_value(v.rhs));
            Value::Object(obj)
        })
        .collect();
    let mut obj = Map::new();
    obj.insert("passed".into(), Value::from(r.passed()));
    obj.insert("violations".into(), Value::Array(violations));
    obj.insert("notes".into(), Value::from(r.notes().to_vec()));
    Value::Object(obj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lens::product_projection_lens;
    use crate::wcat::check_weighted_category;

    #[test]
    fn space_roundtrip_with_inf() {
        let text = r#"{"points": ["a", "b"], "cost": [[0, 1.5], ["inf", 0]]}"#;
        let s = parse_space(text).unwrap();
        assert_eq!(s.cost().unwrap()[[1, 0]], f64::INFINITY);
        let again = parse_space(&space_value(&s).to_string()).unwrap();
        assert_eq!(again, s);
        assert!(matches!(parse_space(r#"{"points": ["a"], "extra": 1}"#), Err(Error::Parse(_))));
        assert!(matches!(parse_space(r#"{"points": ["a"], "cost": [[0, 1]]}"#), Err(Error::Structural(_))));
        assert!(matches!(parse_space(r#"{"points": ["a"], "cost": [["infinity"]]}"#), Err(Error::Parse(_))));
    }

    #[test]
    fn measure_and_coupling_roundtrip() {
        let x = Arc::new(parse_space(r#"{"points": ["a", "b", "c"]}"#).unwrap());
        let p = parse_measure(r#"{"mass": {"c": 0.75, "a": 0.25}}"#, &x).unwrap();
        assert_eq!(p.mass().to_vec(), vec![0.25, 0.0, 0.75]);
        assert_eq!(parse_measure(&measure_value(&p).to_string(), &x).unwrap(), p);
        assert!(matches!(parse_measure(r#"{"mass": {"d": 1}}"#, &x), Err(Error::Structural(_))));
        assert!(matches!(parse_measure(r#"{"mass": {"a": 0.5}}"#, &x), Err(Error::Invariant(_))));

        let third = 1.0 / 3.0;
        let s = Coupling::from_joint(x.clone(), x.clone(), Array2::from_diag(&ndarray::arr1(&[third, third, third]))).unwrap();
        let text = coupling_value(&s).to_string();
        assert_eq!(parse_coupling(&text, &x, &x).unwrap(), s);
        let y = Arc::new(parse_space(r#"{"points": ["u", "v", "w"]}"#).unwrap());
        assert!(matches!(parse_coupling(&text, &y, &y), Err(Error::Structural(_))));
    }

    #[test]
    fn lens_roundtrip() {
        let y = Arc::new(parse_space(r#"{"points": ["a", "b"], "cost": [[0, 1], [1, 0]]}"#).unwrap());
        let z = parse_space(r#"{"points": ["u", "v"]}"#).unwrap();
        let l = product_projection_lens(y, &z).unwrap();
        let text = lens_value(&l).to_string();
        assert_eq!(parse_lens(&text).unwrap(), l);
        let mut v: Value = serde_json::from_str(&text).unwrap();
        v["lift"].as_array_mut().unwrap().pop();
        assert!(matches!(parse_lens(&v.to_string()), Err(Error::Structural(_))));
    }

    #[test]
    fn category_roundtrip() {
        let text = r#"{
            "objects": ["A", "B"],
            "morphisms": [
                {"name": "1A", "source": "A", "target": "A", "weight": 0},
                {"name": "1B", "source": "B", "target": "B", "weight": 0},
                {"name": "f", "source": "A", "target": "B", "weight": 2.5}
            ],
            "identities": {"A": "1A", "B": "1B"},
            "composition": [["1A", "1A", "1A"], ["1B", "1B", "1B"], ["1A", "f", "f"], ["f", "1B", "f"]]
        }"#;
        let c = parse_category(text).unwrap();
        assert!(check_weighted_category(&c, 0.0).unwrap().passed());
        assert_eq!(parse_category(&category_value(&c).to_string()).unwrap(), c);
        let bad = text.replace(r#"["f", "1B", "f"]"#, r#"["f", "1B", "g"]"#);
        assert!(matches!(parse_category(&bad), Err(Error::Structural(_))));
        let d = parse_dagger(r#"{"dagger": {"1A": "1A", "1B": "1B", "f": "f"}}"#, &c).unwrap();
        assert_eq!(d, vec![0, 1, 2]);
        let functor =
            parse_functor(r#"{"objects": {"A": "A", "B": "B"}, "morphisms": {"1A": "1A", "1B": "1B", "f": "f"}}"#, &c, &c).unwrap();
        assert_eq!(functor, FinFunctor::identity(&c));
    }

    #[test]
    fn numbers_are_lossless() {
        let x = Arc::new(FiniteSpace::indexed("x", 3).unwrap());
        let mass = vec![0.1, 0.2, 0.7000000000000001];
        let p = Measure::new(x.clone(), mass.clone()).unwrap();
        let back = parse_measure(&measure_value(&p).to_string(), &x).unwrap();
        assert_eq!(back.mass().to_vec(), mass);
    }
}
