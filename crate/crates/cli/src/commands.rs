use std::fmt::Write as _;
use std::path::Path;

use qglt_core::discretize::{assemble_cut_even, assemble_cut_split};
use qglt_core::functionals::{star_spectrum, theorem1_bound};
use qglt_core::search::maximize_ratio_with;
use qglt_core::symmetry::{SectorSpectra, SplitSpectra};
use qglt_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Check, Command, SearchArgs, SweepArgs, VerifyArgs};
use crate::settings::Settings;
use crate::{CliError, Inputs, Output};

type Result<T> = std::result::Result<T, CliError>;

const IDENTITY_TOL: f64 = 1e-8;
const DOMINATION_TOL: f64 = 1e-9;
const BOUND_TOL: f64 = 1e-4;

pub fn dispatch(cmd: &Command, s: &Settings, inputs: &mut Inputs) -> Result<Output> {
    match cmd {
        Command::Solve { dump_operator } => solve(s, inputs, dump_operator.as_deref()),
        Command::Verify(v) => verify(v, s, inputs),
        Command::Sweep(a) => sweep(a, s, inputs),
        Command::Search(a) => search(a, s),
        Command::Oracle { compare } => oracle(*compare, s, inputs),
    }
}

fn read_field(path: &Path, edges: Option<usize>, inputs: &mut Inputs) -> Result<PotentialField> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let field = PotentialField::from_json_str(text).map_err(|e| match e {
        Error::Schema { path: p, message } => CliError::Input(format!("{}: at `{p}`: {message}", path.display())),
        other => CliError::Input(format!("{}: {other}", path.display())),
    })?;
    inputs.push(path, bytes);
    match edges {
        Some(n) if n != field.n_edges() && field.n_edges() == 1 => {
            Ok(radial_field(StarGraph::new(n)?, field.edge(0)))
        }
        Some(n) if n != field.n_edges() => Err(CliError::Usage(format!(
            "--edges {n} does not match n_edges = {} in {}",
            field.n_edges(),
            path.display()
        ))),
        _ => Ok(field),
    }
}

fn required_field(s: &Settings, inputs: &mut Inputs) -> Result<PotentialField> {
    match &s.potential {
        Some(p) => read_field(p, s.edges, inputs),
        None => Err(CliError::Usage("--potential is required".into())),
    }
}

fn graph_of(s: &Settings, default: usize) -> Result<StarGraph> {
    StarGraph::new(s.edges.unwrap_or(default)).map_err(|e| CliError::Usage(format!("--edges: {e}")))
}

#[derive(Serialize)]
struct SolveReport {
    gamma: f64,
    n_edges: usize,
    grid: GridInfo,
    spectrum: Spectrum,
    riesz: f64,
    norm: f64,
    ratio: Option<f64>,
}

fn solve(s: &Settings, inputs: &mut Inputs, dump: Option<&Path>) -> Result<Output> {
    s.check_gamma()?;
    let field = required_field(s, inputs)?;
    let grid = s.grid()?;
    let op = assemble_star(field.graph(), &field, &grid)?;
    if let Some(path) = dump {
        let text = serde_json::to_string_pretty(&op.dump()).expect("dump serializes");
        std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    let spectrum = negative_spectrum(&op, s.tolerances()?)?;
    let riesz = riesz_mean(&spectrum, s.gamma);
    let norm = potential_norm(&field, s.gamma)?;
    let report = SolveReport {
        gamma: s.gamma,
        n_edges: field.n_edges(),
        grid: (&grid).into(),
        ratio: (norm > 0.0).then(|| riesz / norm),
        spectrum,
        riesz,
        norm,
    };
    let mut tsv = format!(
        "# gamma = {}, riesz = {}, norm = {}, ratio = {}\nk\teigenvalue\n",
        report.gamma,
        report.riesz,
        report.norm,
        report.ratio.map_or("nan".into(), |r| r.to_string())
    );
    for (k, e) in report.spectrum.eigenvalues.iter().enumerate() {
        let _ = writeln!(tsv, "{}\t{e}", k + 1);
    }
    Ok(Output { json: serde_json::to_value(&report).expect("report serializes"), tsv, passed: true })
}

/// One gated statistic of one check on one field.
#[derive(Debug, Clone, Serialize)]
struct Row {
    check: Check,
    field: usize,
    gamma: f64,
    statistic: String,
    value: f64,
    limit: f64,
    passed: bool,
    report: Value,
}

impl Row {
    fn new(check: Check, statistic: &str, value: f64, limit: f64, passed: bool, report: impl Serialize) -> Self {
        Self {
            check,
            field: 0,
            gamma: f64::NAN,
            statistic: statistic.to_string(),
            value,
            limit,
            passed,
            report: serde_json::to_value(report).expect("report serializes"),
        }
    }
}

fn lt_row(check: Check, r: &LtReport) -> Row {
    Row::new(check, "ratio", r.ratio, r.bound + BOUND_TOL, !r.violated(), r)
}

fn sample_fields(check: Option<Check>, s: &Settings, samples: usize) -> Result<Vec<PotentialField>> {
    let graph = match s.edges {
        Some(n) => StarGraph::new(n).map_err(|e| CliError::Usage(format!("--edges: {e}")))?,
        None => return Err(CliError::Usage("--edges is required when no --potential is given".into())),
    };
    let radial = matches!(check, Some(Check::Sector | Check::Lemma | Check::Theorem2));
    let sampler = ProfileSampler::default();
    Ok((0..samples as u64)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed.wrapping_add(i));
            if radial {
                radial_field(graph, &sampler.profile(&mut rng))
            } else {
                sampler.field(&mut rng, graph)
            }
        })
        .collect())
}

fn applicable(field: &PotentialField) -> Vec<Check> {
    let n = field.n_edges();
    let radial = field.is_radial();
    let mut checks = vec![Check::Theorem1];
    if radial {
        checks.extend([Check::Sector, Check::Lemma]);
        if n >= 2 {
            checks.push(Check::Theorem2);
        }
    }
    if n.is_multiple_of(2) {
        checks.push(Check::CutEven);
    } else {
        checks.push(Check::SplitBound);
        if n >= 3 {
            checks.extend([Check::CutSplit, Check::Mono]);
        }
    }
    checks
}

fn default_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1..=n).map(|i| vec![i]).collect();
    for i in 1..=n {
        for j in i + 1..=n {
            out.push(vec![i, j]);
        }
    }
    out.retain(|s| s.len() < n);
    out
}

#[derive(Serialize)]
struct Domination<'a> {
    subset: Option<&'a [usize]>,
    star: &'a [f64],
    cut: &'a [f64],
    max_excess: f64,
    star_trace: f64,
    cut_trace: f64,
}

fn domination_row(check: Check, gamma: f64, star: &Spectrum, cut: &Spectrum, subset: Option<&[usize]>) -> Row {
    let max_excess = star
        .eigenvalues
        .iter()
        .zip(&cut.eigenvalues)
        .map(|(s, c)| c - s)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    let counts_ok = star.len() <= cut.len();
    let report = Domination {
        subset,
        star: &star.eigenvalues,
        cut: &cut.eigenvalues,
        max_excess,
        star_trace: riesz_mean(star, gamma),
        cut_trace: riesz_mean(cut, gamma),
    };
    let passed = counts_ok && max_excess <= DOMINATION_TOL;
    let statistic = match subset {
        Some(sub) => format!("max_excess_{}", sub.iter().map(usize::to_string).collect::<Vec<_>>().join("+")),
        None => "max_excess".into(),
    };
    Row::new(check, &statistic, max_excess, DOMINATION_TOL, passed, report)
}

fn run_check(check: Check, field: &PotentialField, v: &VerifyArgs, s: &Settings) -> Result<Vec<Row>> {
    let grid = s.grid()?;
    let tol = s.tolerances()?;
    let gamma = s.gamma;
    let n = field.n_edges();
    let graph = field.graph();
    let radial_profile = || {
        if field.is_radial() {
            Ok(field.edge(0).clone())
        } else {
            Err(CliError::Usage(format!("--potential: `{}` needs a radial field", name(check))))
        }
    };
    let rows = match check {
        Check::Sector => {
            let r = SectorSpectra::compute(graph, &radial_profile()?, &grid, tol)?.report(gamma);
            vec![Row::new(check, "rel_residual", r.rel_residual, IDENTITY_TOL, r.passed(IDENTITY_TOL), r)]
        }
        Check::Lemma => {
            let r = SplitSpectra::compute(&radial_profile()?, &grid, tol)?.report(gamma);
            let (l, prov) = reference_constant(gamma)?;
            let neumann_ok = prov.is_conjectural() || r.neumann_ratio <= 2.0 * l + BOUND_TOL;
            let passed = r.rel_residual <= IDENTITY_TOL && r.multiset_distance <= IDENTITY_TOL && neumann_ok;
            vec![Row::new(check, "rel_residual", r.rel_residual, IDENTITY_TOL, passed, r)]
        }
        Check::CutEven => {
            let star = star_spectrum(field, &grid, tol)?;
            let cut = negative_spectrum(&DiscreteOperator::direct_sum(assemble_cut_even(graph, field, &grid)?), tol)?;
            vec![domination_row(check, gamma, &star, &cut, None)]
        }
        Check::CutSplit => {
            let star = star_spectrum(field, &grid, tol)?;
            let subsets = v.subset.clone().map_or_else(|| default_subsets(n), |s| vec![s]);
            subsets
                .iter()
                .map(|sub| {
                    let (a, b) = assemble_cut_split(graph, field, &grid, sub)?;
                    let cut = negative_spectrum(&DiscreteOperator::direct_sum(vec![a, b]), tol)?;
                    Ok(domination_row(check, gamma, &star, &cut, Some(sub)))
                })
                .collect::<Result<_>>()?
        }
        Check::Theorem1 => vec![lt_row(check, &check_theorem1(field, gamma, &grid, tol)?)],
        Check::Theorem2 => vec![lt_row(check, &check_theorem2(field, gamma, &grid, tol)?)],
        Check::SplitBound => {
            let r = check_split_bound(field, gamma, &grid, tol)?;
            let mut rows = vec![lt_row(check, &r.averaged)];
            rows.extend(r.per_edge.iter().enumerate().map(|(j, e)| {
                let mut row = lt_row(check, e);
                row.statistic = format!("ratio_edge_{}", j + 1);
                row
            }));
            rows
        }
        Check::Mono => {
            let n0s: Vec<usize> = match v.n0 {
                Some(k) => vec![k],
                None => (1..n).step_by(2).collect(),
            };
            n0s.into_iter()
                .map(|n0| {
                    let r = check_mono(field, gamma, &grid, tol, n0, v.l_n0)?;
                    let mut row = lt_row(check, &r);
                    row.statistic = format!("ratio_n0_{n0}");
                    Ok(row)
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(rows
        .into_iter()
        .map(|mut r| {
            r.gamma = gamma;
            r
        })
        .collect())
}

fn name(check: Check) -> String {
    serde_json::to_value(check).expect("check serializes").as_str().unwrap_or_default().to_string()
}

fn verify(v: &VerifyArgs, s: &Settings, inputs: &mut Inputs) -> Result<Output> {
    s.check_gamma()?;
    if v.l_n0.is_some_and(|l| l.is_nan() || l <= 0.0) {
        return Err(CliError::Usage("--l-n0 must be positive".into()));
    }
    let fields = match &s.potential {
        Some(p) => vec![read_field(p, s.edges, inputs)?],
        None => sample_fields(v.check, s, v.samples)?,
    };
    let tasks: Vec<(usize, Check)> = fields
        .iter()
        .enumerate()
        .flat_map(|(i, f)| match v.check {
            Some(c) => vec![(i, c)],
            None => applicable(f).into_iter().map(|c| (i, c)).collect(),
        })
        .collect();
    let results: Vec<Vec<Row>> = tasks
        .par_iter()
        .map(|&(i, c)| {
            run_check(c, &fields[i], v, s).map(|rows| {
                rows.into_iter()
                    .map(|mut r| {
                        r.field = i;
                        r
                    })
                    .collect()
            })
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Row> = results.into_iter().flatten().collect();
    let passed = rows.iter().all(|r| r.passed);
    let mut tsv = String::from("check\tfield\tgamma\tstatistic\tvalue\tlimit\tpassed\n");
    for r in &rows {
        let _ = writeln!(
            tsv,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            name(r.check),
            r.field,
            r.gamma,
            r.statistic,
            r.value,
            r.limit,
            r.passed
        );
    }
    let sampled = s.potential.is_none();
    let json = json!({
        "fields": fields.len(),
        "sampled": sampled,
        "checks": rows,
        "passed": passed,
    });
    Ok(Output { json, tsv, passed })
}

fn line_from(field: &PotentialField) -> Result<LinePotential> {
    match field.n_edges() {
        1 => Ok(symmetric_extension(field.edge(0))),
        2 => Ok(LinePotential::new(field.edge(1).clone(), field.edge(0).clone())),
        n => Err(CliError::Usage(format!(
            "--potential: a sweep needs a one-edge profile or a two-edge line, got {n} edges"
        ))),
    }
}

fn sweep(a: &SweepArgs, s: &Settings, inputs: &mut Inputs) -> Result<Output> {
    s.check_gamma()?;
    let line = match &s.potential {
        Some(p) => line_from(&read_field(p, None, inputs)?)?,
        None => LinePotential::centered_well(a.width, -a.depth)
            .map_err(|e| CliError::Usage(format!("--depth/--width: {e}")))?,
    };
    let graph = graph_of(s, 3)?;
    let max_offset = a.offsets.iter().copied().fold(0.0, f64::max);
    let auto = sweep_grid(&line, max_offset, s.h)?;
    let points = auto.points_per_edge().max((s.len / s.h).round() as usize);
    let grid = GridSpec::new(s.h, points, s.far_bc())?;
    let sweep = translation_sweep(&line, graph, &a.offsets, s.gamma, &grid, s.tolerances()?)?;
    let json = json!({
        "sweep": sweep,
        "rel_gaps": sweep.rel_gaps(),
        "grid": GridInfo::from(&grid),
    });
    Ok(Output { json, tsv: sweep.to_tsv(), passed: true })
}

fn search(a: &SearchArgs, s: &Settings) -> Result<Output> {
    s.check_gamma()?;
    let mut cfg = s.search;
    cfg.seed = s.seed;
    if let Some(c) = a.cells {
        cfg.cells_per_edge = c;
    }
    if let Some(r) = a.restarts {
        cfg.restarts = r;
    }
    if let Some(m) = a.max_iters {
        cfg.max_iters = m;
    }
    cfg.symmetrize |= a.symmetrize;
    cfg.validate().map_err(|e| CliError::Usage(format!("search config: {e}")))?;
    let graph = graph_of(s, 2)?;
    let grid = s.grid()?;
    let result = maximize_ratio_with(graph, s.gamma, &cfg, &grid, s.tolerances()?)?;
    let (bound, prov) = theorem1_bound(graph.n_edges(), s.gamma)?;
    let report = LtReport::new(s.gamma, graph.n_edges(), result.best_ratio, bound, prov, (&grid).into());
    let json = json!({
        "config": cfg,
        "result": result,
        "best_field": result.best_field.to_json_value(),
        "bound": report,
    });
    Ok(Output { json, tsv: result.trace_tsv(), passed: !report.violated() })
}

#[derive(Serialize)]
struct OracleRow {
    k: usize,
    eigenvalue: f64,
    discrete: Option<f64>,
    abs_diff: Option<f64>,
}

fn oracle(compare: bool, s: &Settings, inputs: &mut Inputs) -> Result<Output> {
    let field = required_field(s, inputs)?;
    let spec = secular_bound_states(field.graph(), &field, None)?;
    let discrete = if compare { Some(star_spectrum(&field, &s.grid()?, s.tolerances()?)?) } else { None };
    let rows: Vec<OracleRow> = spec
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let d = discrete.as_ref().and_then(|d| d.eigenvalues.get(k).copied());
            OracleRow { k: k + 1, eigenvalue: e, discrete: d, abs_diff: d.map(|d| (d - e).abs()) }
        })
        .collect();
    let mut tsv = String::from("k\teigenvalue\tdiscrete\tabs_diff\n");
    for r in &rows {
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        let _ = writeln!(tsv, "{}\t{}\t{}\t{}", r.k, r.eigenvalue, opt(r.discrete), opt(r.abs_diff));
    }
    let json = json!({
        "n_edges": field.n_edges(),
        "eigenvalues": spec.eigenvalues,
        "discrete_count": discrete.as_ref().map(Spectrum::len),
        "levels": rows,
    });
    Ok(Output { json, tsv, passed: true })
}
