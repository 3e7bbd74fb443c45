//! Scenario runner: executes the experiment list of a scenario and builds
//! the JSON report and CSV curves.

use std::time::{SystemTime, UNIX_EPOCH};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::anosov::AnosovMap;
use crate::config::{Budgets, Experiment, ScenarioConfig};
use crate::distortion::{
    disto_curve, disto_witness_curve, pi1_disto_witness_curve, seemingly_distortion_scan, separation_scan,
    tight_dynamics_scan, DistortionCurve,
};
use crate::error::{Error, Result};
use crate::free_product::{hat_lift, magic_pair, NormalSets};
use crate::functions::{to_f64, SupportedFunction};
use crate::gog::{GraphOfGroups, OrientedEdge, Pi1Element};
use crate::rd::{amenable_lower_bound, rd_ratio_curve};
use crate::scenarios;

pub const SCHEMA_VERSION: u32 = 1;

/// Command-line overrides applied on top of the scenario budgets.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub radius: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub budget_elements: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(r) = self.radius {
            cfg.budgets.radius = r;
            cfg.experiments.iter_mut().for_each(|e| e.set_radius(r));
        }
        if let Some(s) = self.samples {
            cfg.budgets.samples = s;
            cfg.experiments.iter_mut().for_each(|e| e.set_samples(s));
        }
        if let Some(s) = self.seed {
            cfg.budgets.seed = s;
        }
        if let Some(b) = self.budget_elements {
            cfg.budgets.budget_elements = b;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// Stopped at a budget; `result` holds whatever was measured.
    BudgetExceeded,
    NoSamples,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveRow {
    pub x: f64,
    pub value: f64,
    pub witness: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Curve {
    pub name: String,
    pub rows: Vec<CurveRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentOutcome {
    pub index: usize,
    pub kind: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub result: Value,
    #[serde(skip)]
    pub curves: Vec<Curve>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub description: String,
    /// Seconds since the Unix epoch; the only field that varies between runs.
    pub generated_at: u64,
    pub budgets: Budgets,
    pub partial: bool,
    pub experiments: Vec<ExperimentOutcome>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The JSON document with `generated_at` zeroed, for comparisons.
    pub fn to_json_stable(&self) -> String {
        let mut r = self.clone();
        r.generated_at = 0;
        r.to_json()
    }

    /// 0 when complete, 2 when a budget was hit, 1 on other failures.
    pub fn exit_code(&self) -> i32 {
        if self.experiments.iter().any(|e| e.status == Status::Error) {
            1
        } else if self.partial {
            2
        } else {
            0
        }
    }

    /// `(file name, contents)` for every curve, with header `x,value,witness`.
    pub fn csv_files(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for e in &self.experiments {
            for c in &e.curves {
                let mut text = String::from("x,value,witness\n");
                for row in &c.rows {
                    text.push_str(&format!("{},{},{}\n", row.x, row.value, csv_field(&row.witness)));
                }
                out.push((format!("{}-{:02}-{}-{}.csv", self.scenario, e.index, e.kind, c.name), text));
            }
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Runs a bundled scenario by id.
pub fn run_scenario(id: &str, overrides: &Overrides) -> Result<Report> {
    run(scenarios::load(id)?, overrides)
}

pub fn run(mut cfg: ScenarioConfig, overrides: &Overrides) -> Result<Report> {
    overrides.apply(&mut cfg);
    let graph = if cfg.has_graph() { Some(cfg.build_graph()?) } else { None };
    let cfg = &cfg;
    let graph = graph.as_ref();
    let outcomes: Vec<ExperimentOutcome> = std::thread::scope(|s| {
        let handles: Vec<_> = cfg
            .experiments
            .iter()
            .enumerate()
            .map(|(i, e)| s.spawn(move || run_experiment(cfg, graph, i, e)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("experiment thread panicked")).collect()
    });
    let partial = outcomes.iter().any(|o| o.status == Status::BudgetExceeded);
    let generated_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        scenario: cfg.id.clone(),
        description: cfg.description.clone(),
        generated_at,
        budgets: cfg.budgets.clone(),
        partial,
        experiments: outcomes,
    })
}

struct Output {
    status: Status,
    result: Value,
    curves: Vec<Curve>,
}

impl Output {
    fn ok(result: Value, curves: Vec<Curve>) -> Self {
        Output { status: Status::Ok, result, curves }
    }
}

fn run_experiment(cfg: &ScenarioConfig, graph: Option<&GraphOfGroups>, index: usize, e: &Experiment) -> ExperimentOutcome {
    let outcome = match (e.needs_graph(), graph) {
        (true, None) => Err(Error::GraphIllFormed("experiment needs a graph of groups".into())),
        (_, g) => execute(cfg, g, e),
    };
    let (status, error, out) = match outcome {
        Ok(o) => (o.status, None, Some(o)),
        Err(err @ Error::BudgetExceeded { .. }) => (Status::BudgetExceeded, Some(err.to_string()), None),
        Err(err @ Error::NoSamplesFound(_)) => (Status::NoSamples, Some(err.to_string()), None),
        Err(err) => (Status::Error, Some(err.to_string()), None),
    };
    let (result, curves) = out.map(|o| (o.result, o.curves)).unwrap_or((Value::Null, vec![]));
    ExperimentOutcome { index, kind: e.kind(), status, error, result, curves }
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

fn disto_output(curve: DistortionCurve) -> Output {
    let diam = Curve {
        name: "diam".into(),
        rows: curve
            .points
            .iter()
            .map(|p| CurveRow { x: p.n as f64, value: p.diam as f64, witness: format!("{} ; {}", p.witness.0, p.witness.1) })
            .collect(),
    };
    let disto = Curve {
        name: "disto".into(),
        rows: curve.points.iter().map(|p| CurveRow { x: p.n as f64, value: p.disto, witness: String::new() }).collect(),
    };
    let status = if curve.truncated_at.is_some() { Status::BudgetExceeded } else { Status::Ok };
    Output { status, result: to_value(&curve), curves: vec![diam, disto] }
}

fn graph_of(g: Option<&GraphOfGroups>) -> &GraphOfGroups {
    g.expect("checked by run_experiment")
}

fn execute(cfg: &ScenarioConfig, graph: Option<&GraphOfGroups>, e: &Experiment) -> Result<Output> {
    let budgets = &cfg.budgets;
    let r = e.radius(budgets);
    let samples = e.samples(budgets);
    let seed = budgets.seed;
    match e {
        Experiment::Disto { subgroup, .. } => {
            let h = cfg.subgroup(subgroup)?;
            Ok(disto_output(disto_curve(&h.ambient().clone(), &h, r)?))
        }
        Experiment::DistoWitness { subgroup, template, .. } => {
            let h = cfg.subgroup(subgroup)?;
            Ok(disto_output(disto_witness_curve(&h.ambient().clone(), &h, template, r as i64)?))
        }
        Experiment::Pi1Disto { subgroup, conjugator, core, .. } => {
            let gog = graph_of(graph);
            let def = cfg.subgroups.get(subgroup).ok_or_else(|| Error::ConfigParse(format!("unknown subgroup {subgroup:?}")))?;
            let h = cfg.subgroup_in(def, gog.group(gog.base()))?;
            let w = gog.parse_sequence(gog.base(), conjugator)?;
            let c = gog.parse_sequence(gog.base(), core)?;
            Ok(disto_output(pi1_disto_witness_curve(gog, &h, &w, &c, r)?))
        }
        Experiment::Pi1Length { elements, .. } => pi1_lengths(graph_of(graph), elements, r),
        Experiment::LengthIdentity { template, reference, n_min, divisor, offset, .. } => {
            length_identity(graph_of(graph), template, reference, *n_min, r as u32, *divisor, *offset)
        }
        Experiment::Seemingly { edge_radius, .. } => {
            let rep = seemingly_distortion_scan(graph_of(graph), r, edge_radius.unwrap_or(2), samples, seed)?;
            let curve = Curve {
                name: "worst_ratio".into(),
                rows: rep.points.iter().map(|p| CurveRow { x: p.n as f64, value: p.worst_ratio, witness: p.witness.clone() }).collect(),
            };
            Ok(Output::ok(to_value(&rep), vec![curve]))
        }
        Experiment::Tight { edge, forward, k_max, .. } => {
            let gog = graph_of(graph);
            let idx = gog.edge_index(edge).ok_or_else(|| Error::ConfigParse(format!("unknown edge {edge:?}")))?;
            let rep = tight_dynamics_scan(gog, OrientedEdge { edge: idx, forward: *forward }, *k_max, samples, r, seed)?;
            let curve = Curve {
                name: "constants".into(),
                rows: rep.constants.iter().map(|&(k, c)| CurveRow { x: k as f64, value: c, witness: String::new() }).collect(),
            };
            Ok(Output::ok(to_value(&rep), vec![curve]))
        }
        Experiment::Separation { subgroups, us, .. } => {
            let hs = subgroups.iter().map(|n| cfg.subgroup(n)).collect::<Result<Vec<_>>>()?;
            let Some(first) = hs.first() else { return Err(Error::ConfigParse("separation needs subgroups".into())) };
            let names: Vec<&String> = subgroups.iter().map(|n| &cfg.subgroups[n].group).collect();
            if names.iter().any(|g| *g != names[0]) {
                return Err(Error::ConfigParse("separation subgroups must share one ambient group".into()));
            }
            let ambient = first.ambient().clone();
            let us = us.iter().map(|u| ambient.parse(u)).collect::<Result<Vec<_>>>()?;
            let refs: Vec<_> = hs.iter().collect();
            let rep = separation_scan(&ambient, &refs, &us, r)?;
            let curve = Curve {
                name: "c_of_n".into(),
                rows: rep.table.iter().map(|&(n, c)| CurveRow { x: n as f64, value: c, witness: String::new() }).collect(),
            };
            Ok(Output::ok(to_value(&rep), vec![curve]))
        }
        Experiment::Rd { group, strategy, .. } => {
            let g = cfg.group(group)?;
            let curve = rd_ratio_curve(&g, r, *strategy, samples, seed)?;
            let rows = curve
                .points
                .iter()
                .map(|p| CurveRow { x: p.r as f64, value: to_f64(&p.ratio_sq), witness: format!("{} ; {}", p.best_f, p.best_g) })
                .collect();
            Ok(Output::ok(to_value(&curve), vec![Curve { name: "ratio_sq".into(), rows }]))
        }
        Experiment::Amenable { group, factor, .. } => {
            let h = cfg.group(group)?;
            let bounds = (1..=r).map(|rr| amenable_lower_bound(&h, rr, factor * rr)).collect::<Result<Vec<_>>>()?;
            let rows = bounds
                .iter()
                .map(|b| CurveRow { x: b.r as f64, value: b.ratio, witness: format!("|B(r)| = {}", b.ball_size) })
                .collect();
            Ok(Output::ok(json!({ "factor": factor, "bounds": bounds }), vec![Curve { name: "bound".into(), rows }]))
        }
        Experiment::Anosov { matrix, gammas, eta, j_range, box_bound, .. } => {
            anosov_suite(*matrix, gammas, *eta, *j_range, *box_bound, r as i64, samples, seed)
        }
        Experiment::Magic { .. } => magic_trials(graph_of(graph), r, samples, seed),
        Experiment::Hat { .. } => hat_isometry(graph_of(graph), r),
        Experiment::LocalTree { rep_cutoff, .. } => {
            let gog = graph_of(graph);
            let nodes = gog.local_tree(r, *rep_cutoff, budgets.budget_elements)?;
            let acyclic = gog.tree_nodes_distinct(&nodes)?;
            let per_depth: Vec<usize> = (0..=r).map(|d| nodes.iter().filter(|n| n.depth == d).count()).collect();
            let root_children = nodes.iter().filter(|n| n.parent == Some(0)).count();
            let labels: Vec<String> = nodes.iter().map(|n| format!("{} {}", gog.format_sequence(&n.path), gog.vertices[n.vertex].name)).collect();
            let rows = per_depth.iter().enumerate().map(|(d, &c)| CurveRow { x: d as f64, value: c as f64, witness: String::new() }).collect();
            Ok(Output::ok(
                json!({ "depth": r, "rep_cutoff": rep_cutoff, "nodes": nodes.len(), "per_depth": per_depth, "root_children": root_children, "acyclic": acyclic, "labels": labels }),
                vec![Curve { name: "nodes_per_depth".into(), rows }],
            ))
        }
    }
}

fn pi1_lengths(gog: &GraphOfGroups, elements: &[String], cutoff: usize) -> Result<Output> {
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for (i, text) in elements.iter().enumerate() {
        let s = gog.parse_sequence(gog.base(), text)?;
        let upper = gog.gamma_length(&s)?;
        let p = gog.pi1(&s)?;
        let length = gog.pi1_word_length(&p, cutoff)?;
        table.push(json!({ "element": text, "gamma_length": upper, "length": length, "normal_form": gog.format_sequence(p.sequence()) }));
        rows.push(CurveRow { x: i as f64, value: length.map(|l| l as f64).unwrap_or(f64::NAN), witness: text.clone() });
    }
    Ok(Output::ok(json!({ "cutoff": cutoff, "elements": table }), vec![Curve { name: "length".into(), rows }]))
}

/// `{p}` is `2^n`, `{q}` is `2^(n-2)`.
pub fn substitute_powers(text: &str, n: u32) -> String {
    text.replace("{p}", &(1u64 << n).to_string()).replace("{q}", &(1u64 << n.saturating_sub(2)).to_string())
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityRow {
    pub n: u32,
    pub lhs: usize,
    pub reference: usize,
    pub holds: bool,
    pub same_element: bool,
}

/// `L_Gamma(template_n) = L_Gamma(reference_n) / divisor + offset`, exactly.
pub fn length_identity_rows(
    gog: &GraphOfGroups,
    template: &str,
    reference: &str,
    n_min: u32,
    n_max: u32,
    divisor: usize,
    offset: usize,
) -> Result<Vec<IdentityRow>> {
    let mut rows = Vec::new();
    for n in n_min..=n_max {
        let s = gog.parse_sequence(gog.base(), &substitute_powers(template, n))?;
        let t = gog.parse_sequence(gog.base(), &substitute_powers(reference, n))?;
        let (lhs, reference) = (gog.gamma_length(&s)?, gog.gamma_length(&t)?);
        let same_element = gog.pi1_equal(&gog.pi1(&s)?, &gog.pi1(&t)?)?;
        rows.push(IdentityRow { n, lhs, reference, holds: divisor * lhs == reference + divisor * offset, same_element });
    }
    Ok(rows)
}

fn length_identity(gog: &GraphOfGroups, template: &str, reference: &str, n_min: u32, n_max: u32, divisor: usize, offset: usize) -> Result<Output> {
    let rows = length_identity_rows(gog, template, reference, n_min, n_max, divisor, offset)?;
    let curve = rows.iter().map(|r| CurveRow { x: r.n as f64, value: r.lhs as f64, witness: substitute_powers(template, r.n) }).collect();
    let all = rows.iter().all(|r| r.holds && r.same_element);
    Ok(Output::ok(json!({ "divisor": divisor, "offset": offset, "all_hold": all, "rows": rows }), vec![Curve { name: "lhs".into(), rows: curve }]))
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeCheck {
    pub samples: usize,
    /// Largest `|sl(A g) - lambda^2 sl(g)| / (lambda^2 sl(g))`.
    pub max_relative_error: f64,
}

/// `sl(A g) = lambda^2 sl(g)` on random nonzero `g` with `||g||_inf <= bound`.
pub fn slope_relation(map: &AnosovMap, samples: usize, bound: i64, seed: u64) -> Result<SlopeCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l2 = map.lambda * map.lambda;
    let (mut count, mut worst) = (0, 0.0f64);
    while count < samples {
        let g = [rng.gen_range(-bound..=bound) as i128, rng.gen_range(-bound..=bound) as i128];
        if g == [0, 0] {
            continue;
        }
        let (a, b) = (map.slope(g)?.value(), map.slope(map.apply(g))?.value());
        count += 1;
        if a.is_finite() && a > 0.0 {
            worst = worst.max((b - l2 * a).abs() / (l2 * a));
        }
    }
    Ok(SlopeCheck { samples: count, max_relative_error: worst })
}

#[allow(clippy::too_many_arguments)]
fn anosov_suite(matrix: [[i64; 2]; 2], gammas: &[[i64; 2]], eta: [i64; 2], j_range: i64, box_bound: i64, n_max: i64, samples: usize, seed: u64) -> Result<Output> {
    let map = AnosovMap::new(matrix)?;
    let slope = slope_relation(&map, samples, box_bound, seed)?;
    let (checked, bad_lambda) = map.shrink_equivalence_violations(box_bound as i128, map.lambda);
    let (_, bad_inverse) = map.shrink_equivalence_violations(box_bound as i128, 1.0 / map.lambda);
    let mut windows = Vec::new();
    let mut meridians = Vec::new();
    let mut rows = Vec::new();
    for &g in gammas {
        let w = map.min_iterate_window(g, n_max, j_range)?;
        rows.push(CurveRow { x: w.m_gamma as f64, value: w.worst_rate_error(map.lambda), witness: format!("gamma = ({}, {})", g[0], g[1]) });
        windows.push(json!({
            "gamma": g,
            "m_gamma": w.m_gamma,
            "m_gamma_l1": w.m_gamma_l1,
            "growth_rates": w.growth_rates,
            "worst_rate_error": w.worst_rate_error(map.lambda),
        }));
        match map.meridian_constant(g, eta, n_max, j_range) {
            Ok(m) => meridians.push(to_value(&m)),
            Err(Error::NotABasis { .. }) => {}
            Err(err) => return Err(err),
        }
    }
    let (c1, c2) = map.bi_lipschitz_constants();
    Ok(Output::ok(
        json!({
            "lambda": map.lambda,
            "eigen_residual": map.eigen_residual(),
            "slope_relation": slope,
            "shrink_equivalence": {
                "box_bound": box_bound,
                "checked": checked,
                "violations_threshold_lambda": bad_lambda,
                "violations_threshold_inverse_lambda": bad_inverse,
            },
            "windows": windows,
            "meridians": meridians,
            "bi_lipschitz": [c1, c2],
        }),
        vec![Curve { name: "window_rate_error".into(), rows }],
    ))
}

/// Random nonnegative rational function on `support`.
pub fn random_function<E: Ord + Clone>(rng: &mut ChaCha8Rng, support: &[E]) -> Result<SupportedFunction<E>> {
    let den = rng.gen_range(1..=4);
    let mut vals: Vec<(E, i128)> = Vec::new();
    for e in support {
        if rng.gen_bool(0.6) {
            vals.push((e.clone(), rng.gen_range(1..=6)));
        }
    }
    if vals.is_empty() {
        vals.push((support[rng.gen_range(0..support.len())].clone(), 1));
    }
    SupportedFunction::from_fractions(0, vals, den)
}

fn magic_trials(gog: &GraphOfGroups, r: usize, trials: usize, seed: u64) -> Result<Output> {
    let ns = NormalSets::build(gog, 2 * r)?;
    let support: Vec<Pi1Element> = ns.ball(r).cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut conv, mut fnorm, mut gnorm, mut all) = (0, 0, 0, 0);
    let (mut inconsistencies, mut pointwise_ok, mut pointwise_total) = (0, 0, 0);
    let mut rows = Vec::new();
    let mut first_failure = Value::Null;
    for t in 0..trials {
        let f = random_function(&mut rng, &support)?;
        let g = random_function(&mut rng, &support)?;
        let (_, _, rep) = magic_pair(gog, &ns, &f, &g)?;
        conv += rep.conv_equal() as usize;
        fnorm += rep.f_equal() as usize;
        gnorm += rep.g_equal() as usize;
        all += rep.all_equal() as usize;
        inconsistencies += rep.inconsistencies;
        pointwise_ok += rep.pointwise_ok;
        pointwise_total += rep.pointwise_total;
        if !rep.all_equal() && first_failure.is_null() {
            first_failure = json!({ "trial": t, "report": rep });
        }
        let ratio = to_f64(&(rep.lifted_conv_sq.clone() / rep.conv_sq.clone()));
        rows.push(CurveRow { x: t as f64, value: ratio, witness: String::new() });
    }
    Ok(Output::ok(
        json!({
            "radius": r,
            "trials": trials,
            "support_size": support.len(),
            "conv_equal": conv,
            "f_equal": fnorm,
            "g_equal": gnorm,
            "all_equal": all,
            "inconsistencies": inconsistencies,
            "pointwise_ok": pointwise_ok,
            "pointwise_total": pointwise_total,
            "first_failure": first_failure,
        }),
        vec![Curve { name: "lifted_over_true_conv_sq".into(), rows }],
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct HatRow {
    pub r: usize,
    pub ball_size: usize,
    #[serde(serialize_with = "crate::free_product::ser_rational")]
    pub norm_sq: BigRational,
    #[serde(serialize_with = "crate::free_product::ser_rational")]
    pub lifted_norm_sq: BigRational,
    pub equal: bool,
}

/// `||f hat||^2` against `||f||^2` for ball indicators up to radius `r`.
pub fn hat_rows(gog: &GraphOfGroups, ns: &NormalSets, r: usize) -> Result<Vec<HatRow>> {
    (0..=r)
        .map(|rr| {
            let f = SupportedFunction::indicator(0, ns.ball(rr).cloned());
            let lifted = hat_lift(gog, ns, &f)?;
            let (a, b) = (f.l2_norm_sq(), lifted.l2_norm_sq());
            Ok(HatRow { r: rr, ball_size: f.support_size(), equal: a == b, norm_sq: a, lifted_norm_sq: b })
        })
        .collect()
}

fn hat_isometry(gog: &GraphOfGroups, r: usize) -> Result<Output> {
    let ns = NormalSets::build(gog, r)?;
    let rows = hat_rows(gog, &ns, r)?;
    let lift = ns.lift_length_curve();
    let curve = lift.iter().map(|&(l, h)| CurveRow { x: l as f64, value: h as f64, witness: String::new() }).collect();
    Ok(Output::ok(json!({ "rows": rows, "lift_length_curve": lift }), vec![Curve { name: "lift_length".into(), rows: curve }]))
}
