use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::actions::{diff_actions, hard_prf, soft_match, ActionScores, OrderTally, PrfSummary, SoftMatch};
use super::bleu::bleu;
use super::coverage::coverage_of_ingredients;
use super::similarity::embed_sim_score;
use super::text::tokenize;
use super::{DishPair, EvalInstance, MetricConfig};
use crate::causal::OrderConstraintSet;
use crate::error::{Error, Result};
use crate::glossary::{EmbeddingTable, Glossary};
use crate::miner::PivotActionSet;
use crate::parser::{parse_recipe, DependencyAnnotations, ExtractOptions};

/// Everything `evaluate` reads besides the instances themselves.
pub struct EvalInputs<'a> {
    pub pairs: &'a [DishPair],
    /// Pivot sets keyed by pair id.
    pub pivots: &'a BTreeMap<String, PivotActionSet>,
    /// Order constraints keyed by pair id.
    pub constraints: &'a BTreeMap<String, OrderConstraintSet>,
    pub glossary: &'a Glossary,
    pub embeddings: &'a EmbeddingTable,
    pub parses: Option<&'a DependencyAnnotations>,
    pub extract: ExtractOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceScores {
    pub pair_id: String,
    pub base_recipe_id: String,
    pub generated_recipe_id: String,
    pub coi_add: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coi_replace: Option<f64>,
    pub bleu: f64,
    pub embed_sim: f64,
    pub hard: ActionScores,
    pub soft: ActionScores,
    pub order: OrderTally,
    pub soft_matches: Vec<SoftMatch>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateScores {
    pub n_instances: usize,
    pub coi_add: f64,
    /// Absent when no instance belongs to a Replace pair.
    pub coi_replace: Option<f64>,
    pub bleu: f64,
    pub embed_sim: f64,
    pub hard: PrfSummary,
    pub soft: PrfSummary,
    /// Pooled share of insertion-pivot hits that pass the order check.
    pub order_accuracy: Option<f64>,
    pub order: OrderTally,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportProvenance {
    pub toolkit_version: String,
    pub metric_config: MetricConfig,
    pub extract_options: ExtractOptions,
    pub tokenization: String,
    pub similarity: String,
    pub soft_matching: String,
    pub soft_order_check: bool,
    pub aggregation: String,
    /// Input name to sha256, filled in by the caller that read the files.
    pub inputs: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub aggregate: AggregateScores,
    pub per_pair: BTreeMap<String, AggregateScores>,
    pub instances: Vec<InstanceScores>,
    pub provenance: ReportProvenance,
}

impl EvalReport {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Scores every instance and aggregates the results.
///
/// Rates are averaged over instances. Aggregate F1 values are the harmonic
/// mean of the averaged precision and recall; order accuracy pools the
/// order checks of all instances.
pub fn evaluate(
    instances: &[EvalInstance],
    inputs: &EvalInputs,
    cfg: &MetricConfig,
) -> Result<EvalReport> {
    cfg.validate()?;
    if instances.is_empty() {
        return Err(Error::EmptyInput("evaluation instances"));
    }
    let pairs: BTreeMap<&str, &DishPair> =
        inputs.pairs.iter().map(|p| (p.pair_id.as_str(), p)).collect();
    let mut scored = Vec::with_capacity(instances.len());
    for inst in instances {
        let pair = *pairs
            .get(inst.pair_id.as_str())
            .ok_or_else(|| Error::UnknownPair(inst.pair_id.clone()))?;
        scored.push(score_instance(inst, pair, inputs, cfg)?);
    }

    let aggregate = aggregate(&scored, &pairs, inputs.glossary, instances, cfg)?;
    let mut per_pair = BTreeMap::new();
    for pair_id in pairs.keys() {
        let idx: Vec<usize> = (0..instances.len())
            .filter(|&i| instances[i].pair_id == *pair_id)
            .collect();
        if idx.is_empty() {
            continue;
        }
        let sub_scored: Vec<InstanceScores> = idx.iter().map(|&i| scored[i].clone()).collect();
        let sub_inst: Vec<EvalInstance> = idx.iter().map(|&i| instances[i].clone()).collect();
        per_pair.insert(
            pair_id.to_string(),
            self::aggregate(&sub_scored, &pairs, inputs.glossary, &sub_inst, cfg)?,
        );
    }

    Ok(EvalReport {
        aggregate,
        per_pair,
        instances: scored,
        provenance: ReportProvenance {
            toolkit_version: crate::TOOLKIT_VERSION.to_string(),
            metric_config: cfg.clone(),
            extract_options: inputs.extract,
            tokenization: "cjk characters, whitespace words otherwise".into(),
            similarity: "embed_sim: greedy max-cosine F1 over static token embeddings".into(),
            soft_matching: "greedy one-to-one by descending similarity, same side only".into(),
            soft_order_check: true,
            aggregation: "mean over instances; F1 from averaged P and R; pooled order accuracy"
                .into(),
            inputs: BTreeMap::new(),
        },
    })
}

fn score_instance(
    inst: &EvalInstance,
    pair: &DishPair,
    inputs: &EvalInputs,
    cfg: &MetricConfig,
) -> Result<InstanceScores> {
    let pivots = inputs
        .pivots
        .get(&pair.pair_id)
        .ok_or_else(|| Error::Schema(format!("no pivot set for pair {}", pair.pair_id)))?;
    let constraints = inputs
        .constraints
        .get(&pair.pair_id)
        .ok_or_else(|| Error::Schema(format!("no order constraints for pair {}", pair.pair_id)))?;
    let parse = |r: &crate::parser::RecipeText| {
        let dep = inputs.parses.and_then(|p| p.for_recipe(&r.recipe_id));
        parse_recipe(r, inputs.glossary, dep, inputs.extract)
    };
    let base = parse(&inst.base_recipe)?;
    let generated = parse(&inst.generated_recipe)?;

    let cov = coverage_of_ingredients(
        &[(pair, &inst.generated_recipe)],
        inputs.glossary,
        cfg.expand_ingredient_forms,
    )?;
    let cand = tokenize(&inst.generated_recipe.text());
    let refr = tokenize(&inst.base_recipe.text());
    let bleu = bleu(&cand, &refr, cfg.bleu_max_n, cfg.smoothing)?;
    let sim = embed_sim_score(&cand, &refr, inputs.embeddings);
    if !sim.missing.is_empty() {
        log::debug!(
            "{} tokens of {} lack embeddings",
            sim.missing.len(),
            inst.generated_recipe.recipe_id
        );
    }

    let changes = diff_actions(&base, &generated);
    let (hard, order) = hard_prf(&changes, pivots, &generated, constraints);
    let soft = soft_match(&changes, pivots, &generated, constraints, inputs.embeddings, cfg);
    Ok(InstanceScores {
        pair_id: pair.pair_id.clone(),
        base_recipe_id: inst.base_recipe.recipe_id.clone(),
        generated_recipe_id: inst.generated_recipe.recipe_id.clone(),
        coi_add: cov.coi_add,
        coi_replace: cov.coi_replace,
        bleu,
        embed_sim: sim.score,
        hard,
        soft: soft.scores,
        order,
        soft_matches: soft.matches,
    })
}

fn aggregate(
    scored: &[InstanceScores],
    pairs: &BTreeMap<&str, &DishPair>,
    glossary: &Glossary,
    instances: &[EvalInstance],
    cfg: &MetricConfig,
) -> Result<AggregateScores> {
    let items: Vec<(&DishPair, &crate::parser::RecipeText)> = instances
        .iter()
        .map(|i| (pairs[i.pair_id.as_str()], &i.generated_recipe))
        .collect();
    let cov = coverage_of_ingredients(&items, glossary, cfg.expand_ingredient_forms)?;
    let n = scored.len() as f64;
    let mut order = OrderTally::default();
    for s in scored {
        order += s.order;
    }
    Ok(AggregateScores {
        n_instances: scored.len(),
        coi_add: cov.coi_add,
        coi_replace: cov.coi_replace,
        bleu: scored.iter().map(|s| s.bleu).sum::<f64>() / n,
        embed_sim: scored.iter().map(|s| s.embed_sim).sum::<f64>() / n,
        hard: PrfSummary::mean(scored.iter().map(|s| &s.hard.prf)),
        soft: PrfSummary::mean(scored.iter().map(|s| &s.soft.prf)),
        order_accuracy: order.accuracy(),
        order,
    })
}

fn pct(x: f64) -> String {
    format!("{:.1}", 100.0 * x)
}

fn opt_pct(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), pct)
}

/// Plain-text tables: surface-level scores, then hard and soft action scores.
pub fn render_table(report: &EvalReport) -> String {
    let mut rows: Vec<(&str, &AggregateScores)> = vec![("all", &report.aggregate)];
    rows.extend(report.per_pair.iter().map(|(k, v)| (k.as_str(), v)));
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(3).max(4);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>5}  {:>8}  {:>12}  {:>6}  {:>9}",
        "pair", "n", "CoI-Add", "CoI-Replace", "BLEU", "embed_sim"
    );
    for (name, a) in &rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>5}  {:>8}  {:>12}  {:>6}  {:>9}",
            name,
            a.n_instances,
            pct(a.coi_add),
            opt_pct(a.coi_replace),
            pct(a.bleu),
            pct(a.embed_sim)
        );
    }
    for (label, pick) in [
        ("hard", (|a: &AggregateScores| a.hard) as fn(&AggregateScores) -> PrfSummary),
        ("soft", |a: &AggregateScores| a.soft),
    ] {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<width$}  {:>6}  {:>6}  {:>6}  {:>6}  {:>6}",
            label, "P", "R", "F1", "F1+", "F1-"
        );
        for (name, a) in &rows {
            let s = pick(a);
            let _ = writeln!(
                out,
                "{:<width$}  {:>6}  {:>6}  {:>6}  {:>6}  {:>6}",
                name,
                pct(s.precision),
                pct(s.recall),
                pct(s.f1),
                pct(s.f1_insert),
                pct(s.f1_remove)
            );
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<width$}  {:>8}  {:>9}", "order", "accuracy", "passed");
    for (name, a) in &rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>8}  {:>9}",
            name,
            opt_pct(a.order_accuracy),
            format!("{}/{}", a.order.passed, a.order.checked)
        );
    }
    out
}
