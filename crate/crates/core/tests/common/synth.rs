//! Generator-labeled synthetic corpora with known answers.

use proctext_core::miner::Category;
use proctext_core::{ProtoAction, ProtoActionSequence};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn act(verb: &str) -> ProtoAction {
    ProtoAction::new(verb, [] as [&str; 0], [] as [&str; 0])
}

pub fn seq(id: &str, verbs: &[&str]) -> ProtoActionSequence {
    ProtoActionSequence::from_protos(id, verbs.iter().map(|v| act(v)))
}

pub const PIVOT_RECIPES: usize = 200;

/// Planted (base rate, target rate, expected category) per action.
pub const PLANTED: [(&str, f64, f64, Category); 4] = [
    ("planted_remove", 0.5, 0.0, Category::Remove),
    ("planted_insert", 0.02, 0.6, Category::Insert),
    ("planted_manual", 0.4, 0.05, Category::Manual),
    ("planted_discard", 0.3, 0.25, Category::Discard),
];

/// Base and target recipes in which each planted action occurs in exactly
/// `rate * 200` recipes, at a random position among shared filler steps.
pub fn pivot_corpus(seed: u64) -> (Vec<ProtoActionSequence>, Vec<ProtoActionSequence>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dish = |name: &str, rate: fn(&(&str, f64, f64, Category)) -> f64| {
        let mut recipes: Vec<Vec<&str>> = (0..PIVOT_RECIPES)
            .map(|_| vec!["wash", "cut", "stir_fry", "plate"])
            .collect();
        for planted in &PLANTED {
            let hits = (rate(planted) * PIVOT_RECIPES as f64).round() as usize;
            let mut idx: Vec<usize> = (0..PIVOT_RECIPES).collect();
            idx.shuffle(&mut rng);
            for &i in &idx[..hits] {
                let at = rng.gen_range(0..=recipes[i].len());
                recipes[i].insert(at, planted.0);
                // a repeat must not change document frequency
                if rng.gen_bool(0.2) {
                    recipes[i].push(planted.0);
                }
            }
        }
        recipes
            .iter()
            .enumerate()
            .map(|(i, verbs)| seq(&format!("{name}-{i:03}"), verbs))
            .collect::<Vec<_>>()
    };
    let base = dish("base", |p| p.1);
    let target = dish("target", |p| p.2);
    (base, target)
}

/// Recipes with recorded potential outcomes for one (cause, effect) pair.
pub struct OutcomeFixture {
    pub recipes: Vec<ProtoActionSequence>,
    pub cause: ProtoAction,
    pub effect: ProtoAction,
    /// Mean of y1 - y0 over all recipes.
    pub oracle_ate: f64,
    /// Treated minus control outcome rate, ignoring the confounder.
    pub naive_difference: f64,
}

/// C ~ Bern(0.5) opens the recipe; the cause follows with probability
/// `0.2 + 0.6 C`; with a shared uniform U the effect closes the recipe when
/// `U < base + 0.5 C + effect * T`. Two independent filler actions are spread
/// over each recipe.
pub fn confounded(n: usize, effect: f64, base: f64, seed: u64) -> OutcomeFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut recipes = Vec::with_capacity(n);
    let mut ite_sum = 0.0;
    let (mut yt, mut nt, mut yc, mut nc) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let c = rng.gen_bool(0.5);
        let t = rng.gen_bool(if c { 0.8 } else { 0.2 });
        let u: f64 = rng.gen();
        let level = base + if c { 0.5 } else { 0.0 };
        let y0 = u < level;
        let y1 = u < level + effect;
        ite_sum += f64::from(u8::from(y1)) - f64::from(u8::from(y0));
        let y = if t { y1 } else { y0 };
        if t {
            nt += 1.0;
            yt += f64::from(u8::from(y));
        } else {
            nc += 1.0;
            yc += f64::from(u8::from(y));
        }

        let mut verbs = vec!["prep"];
        if c {
            verbs.push("confounder");
        }
        if t {
            verbs.push("cause");
        }
        verbs.push("simmer");
        if y {
            verbs.push("effect");
        }
        for filler in ["season", "taste"] {
            if rng.gen_bool(0.5) {
                let at = rng.gen_range(0..=verbs.len());
                verbs.insert(at, filler);
            }
        }
        recipes.push(seq(&format!("r{i:05}"), &verbs));
    }
    OutcomeFixture {
        recipes,
        cause: act("cause"),
        effect: act("effect"),
        oracle_ate: ite_sum / n as f64,
        naive_difference: yt / nt - yc / nc,
    }
}

/// Target-dish recipes with a planted chain `w -> pivot -> z` plus two
/// fillers at random positions.
pub fn chain(n: usize, seed: u64) -> Vec<ProtoActionSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let w = rng.gen_bool(0.5);
            let a = rng.gen_bool(if w { 0.85 } else { 0.1 });
            let z = rng.gen_bool(if a { 0.85 } else { 0.1 });
            let mut verbs = vec!["prep"];
            if w {
                verbs.push("w");
            }
            verbs.push("cut");
            if a {
                verbs.push("pivot");
            }
            if z {
                verbs.push("z");
            }
            verbs.push("plate");
            for filler in ["season", "taste"] {
                if rng.gen_bool(0.5) {
                    let at = rng.gen_range(1..=verbs.len());
                    verbs.insert(at, filler);
                }
            }
            seq(&format!("c{i:05}"), &verbs)
        })
        .collect()
}
