use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use utgrading::constructions::{tensor_algebra, AbstractGradedAlgebra, Cocycle, GradedDivisionAlgebra};
use utgrading::decompose::decompose_with;
use utgrading::graded::{BlockStructure, UTGrading};
use utgrading::group::Group;
use utgrading::linalg::Matrix;
use utgrading::par::{self, Execution};
use utgrading::scalar::Field;
use utgrading::verify::{check_graded_iso, generate_instance, run_plan, GradedAlgebra, GradedLinearMap, InstancePlan};
use utgrading::Error;

fn cli_error(kind: &str, message: impl Into<String>, detail: Value) -> Error {
    Error { module: "cli", kind: kind.to_string(), message: message.into(), detail }
}

fn read_json(path: &Path) -> Result<Value, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| cli_error("Io", format!("{}: {e}", path.display()), json!({"path": path.display().to_string()})))?;
    serde_json::from_str(&text)
        .map_err(|e| cli_error("Json", format!("{}: {e}", path.display()), json!({"path": path.display().to_string()})))
}

fn write_json(path: &Path, v: &Value) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(v).expect("values serialize");
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| cli_error("Io", format!("{}: {e}", path.display()), json!({"path": path.display().to_string()})))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("values serialize"));
}

fn parse_field(v: &Value) -> Result<Field, Error> {
    serde_json::from_value(v.get("field").cloned().unwrap_or(Value::Null))
        .map_err(|e| cli_error("Json", format!("field: {e}"), Value::Null))
}

/// Either concrete algebra a graded map can run between.
enum Algebra {
    Matrices(UTGrading),
    Abstract(AbstractGradedAlgebra),
}

impl Algebra {
    fn as_dyn(&self) -> &dyn GradedAlgebra {
        match self {
            Algebra::Matrices(g) => g,
            Algebra::Abstract(a) => a,
        }
    }
}

/// B ⊗ D of a canonical-form document.
fn canonical_algebra(v: &Value) -> Result<AbstractGradedAlgebra, Error> {
    let field = parse_field(v)?;
    let group = Group::from_json(v.get("group").unwrap_or(&Value::Null))?;
    let sizes: Vec<usize> = serde_json::from_value(v.get("blocks_prime").cloned().unwrap_or(Value::Null))
        .map_err(|e| cli_error("Json", format!("blocks_prime: {e}"), Value::Null))?;
    let eta = v
        .get("eta")
        .and_then(Value::as_array)
        .ok_or_else(|| cli_error("Json", "missing eta", Value::Null))?
        .iter()
        .map(|g| group.parse_element(g))
        .collect::<Result<Vec<_>, _>>()?;
    let d = AbstractGradedAlgebra::from_json_with(Some(field), Some(&group), v.get("division_algebra").unwrap_or(&Value::Null))?;
    let d = GradedDivisionAlgebra::new(d)?;
    Ok(tensor_algebra(&BlockStructure::new(sizes)?, &eta, d.algebra())?)
}

fn load_algebra(v: &Value) -> Result<Algebra, Error> {
    if v.get("psi_matrix").is_some() {
        Ok(Algebra::Abstract(canonical_algebra(v)?))
    } else if v.get("basis").is_some() {
        Ok(Algebra::Matrices(UTGrading::from_json(v)?))
    } else if v.get("structure_constants").is_some() {
        Ok(Algebra::Abstract(AbstractGradedAlgebra::from_json(v)?))
    } else {
        Err(cli_error("UnknownDocument", "expected a grading, an algebra or a canonical form", Value::Null))
    }
}

fn components_json(degrees: &[utgrading::group::GroupElement]) -> Value {
    let mut counts: Vec<(utgrading::group::GroupElement, usize)> = Vec::new();
    for g in degrees {
        match counts.iter_mut().find(|(h, _)| h == g) {
            Some((_, c)) => *c += 1,
            None => counts.push((g.clone(), 1)),
        }
    }
    counts.sort();
    Value::Array(counts.into_iter().map(|(g, d)| json!({"degree": g.to_json(), "dim": d})).collect())
}

pub fn validate(input: &Path) -> Result<(), Error> {
    let v = read_json(input)?;
    let report = if v.get("basis").is_some() {
        let g = UTGrading::from_json(&v)?;
        json!({"format": 1, "kind": "grading", "valid": true, "dim": g.dim(), "components": components_json(g.degrees())})
    } else if v.get("psi_matrix").is_some() {
        let a = canonical_algebra(&v)?;
        json!({"format": 1, "kind": "canonical_form", "valid": true, "dim": a.dim(), "components": components_json(a.degrees())})
    } else if v.get("structure_constants").is_some() {
        let a = AbstractGradedAlgebra::from_json(&v)?;
        let mut r = json!({"format": 1, "kind": "algebra", "valid": true, "dim": a.dim(), "components": components_json(a.degrees())});
        if v.get("division").is_some() {
            let d = GradedDivisionAlgebra::new(a)?;
            r["kind"] = json!("division_algebra");
            r["division"] = json!(d.status().label());
        }
        r
    } else if v.get("support_group").is_some() {
        let c = Cocycle::from_json(parse_field(&v)?, &v)?;
        json!({"format": 1, "kind": "cocycle", "valid": true, "order": c.order()})
    } else if v.get("eta").is_some() {
        let plan = InstancePlan::from_json(&v)?;
        let inst = generate_instance(&plan)?;
        let g = &inst.grading;
        json!({"format": 1, "kind": "plan", "valid": true, "dim": g.dim(), "components": components_json(g.degrees())})
    } else if v.get("kind").is_some() {
        let g = Group::from_json(&v)?;
        json!({"format": 1, "kind": "group", "valid": true, "order": g.order()})
    } else {
        return Err(cli_error("UnknownDocument", "unrecognized input document", Value::Null));
    };
    print_json(&report);
    Ok(())
}

pub fn decompose(input: &Path, output: &Path, check: bool) -> Result<(), Error> {
    let g = UTGrading::from_json(&read_json(input)?)?;
    let mut cf = decompose_with(&g, Execution::Sequential)?;
    let mut failure = None;
    if check {
        let f = GradedLinearMap { source: &cf.algebra, target: &g, matrix: &cf.psi };
        let witness = check_graded_iso(&f, Execution::Sequential)?;
        cf.certificate.graded_iso = Some(witness.is_none());
        failure = witness;
    }
    write_json(output, &cf.to_json())?;
    match failure {
        None => Ok(()),
        Some(w) => Err(utgrading::Error {
            module: "verify",
            kind: "NotGradedIsomorphism".into(),
            message: "ψ is not a graded isomorphism".into(),
            detail: w.to_json(),
        }),
    }
}

pub fn verify_iso(source: &Path, target: &Path, map: Option<&Path>) -> Result<(), Error> {
    let sv = read_json(source)?;
    let a = load_algebra(&sv)?;
    let b = load_algebra(&read_json(target)?)?;
    let field = a.as_dyn().field();
    let m = match map {
        Some(p) => {
            let mv = read_json(p)?;
            Matrix::from_json(field, mv.get("matrix").unwrap_or(&mv))?
        }
        None => match sv.get("psi_matrix") {
            Some(m) => Matrix::from_json(field, m)?,
            None => return Err(cli_error("MissingMap", "no map given and the source has no psi_matrix", Value::Null)),
        },
    };
    let f = GradedLinearMap { source: a.as_dyn(), target: b.as_dyn(), matrix: &m };
    match check_graded_iso(&f, Execution::Sequential)? {
        None => {
            print_json(&json!({"format": 1, "graded_iso": true}));
            Ok(())
        }
        Some(w) => Err(Error {
            module: "verify",
            kind: "NotGradedIsomorphism".into(),
            message: "map is not a graded isomorphism".into(),
            detail: w.to_json(),
        }),
    }
}

pub fn generate(plan: &Path, output: &Path, plant: Option<&Path>) -> Result<(), Error> {
    let plan = InstancePlan::from_json(&read_json(plan)?)?;
    let inst = generate_instance(&plan)?;
    write_json(output, &inst.grading.to_json())?;
    if let Some(p) = plant {
        write_json(p, &inst.plant.to_json())?;
    }
    Ok(())
}

pub fn sweep(dir: &Path, report: &Path, timings: bool) -> Result<(), Error> {
    let entries = fs::read_dir(dir)
        .map_err(|e| cli_error("Io", format!("{}: {e}", dir.display()), json!({"path": dir.display().to_string()})))?;
    let mut files: Vec<_> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut plans = Vec::with_capacity(files.len());
    for path in &files {
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        plans.push((name, InstancePlan::from_json(&read_json(path)?)?));
    }
    // instances in parallel, each one sequential inside
    let results = par::map_slice(Execution::Parallel, &plans, |(name, plan)| {
        run_plan(name, plan, Execution::Sequential, timings)
    });
    let mut reports = Vec::with_capacity(results.len());
    for r in results {
        reports.push(r?);
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass()).map(|r| r.name.as_str()).collect();
    write_json(
        report,
        &json!({
            "format": 1,
            "count": reports.len(),
            "passed": reports.len() - failed.len(),
            "failed": failed.len(),
            "instances": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        }),
    )?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(cli_error("SweepFailures", format!("{} instances failed", failed.len()), json!({"instances": failed})))
    }
}
