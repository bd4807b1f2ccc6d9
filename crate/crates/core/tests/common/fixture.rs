//! Bundled synthetic recipe corpus used by the pipeline tests and the README walkthrough.

use std::collections::BTreeSet;
use std::path::Path;

use proctext_core::glossary::{EmbeddingTable, Glossary, WordClass, WordKind};
use proctext_core::metrics::{ChangeKind, DishPair, EvalInstance, IngredientRef};
use proctext_core::miner::{build_annotation_queue, categorize, pair_frequencies, Label};
use proctext_core::parser::{parse_recipe, ExtractOptions, ProtoActionSequence, RecipeText};
use proctext_core::pipeline::{split, Corpus, SplitSpec};
use proctext_core::{derive_seed, ClassId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const SEED: u64 = 2024;
pub const EVAL_SAMPLE_SIZE: usize = 8;
pub const ANNOTATED_PAIR: &str = "braise-fish";

pub fn glossary() -> Glossary {
    use WordKind::*;
    let c = |id: &str, kind, forms: &[&str]| WordClass::new(id, kind, forms[0], forms.iter().copied());
    Glossary::from_classes(vec![
        c("wash", Verb, &["洗净", "清洗", "刷洗"]),
        c("cut", Verb, &["切块", "切段", "切成", "切"]),
        c("blanch", Verb, &["焯水"]),
        c("stir_fry", Verb, &["翻炒", "炒香", "炒"]),
        c("braise", Verb, &["炖", "焖"]),
        c("add", Verb, &["加入", "放入", "倒入"]),
        c("fry", Verb, &["煎"]),
        c("steam", Verb, &["蒸"]),
        c("marinate", Verb, &["腌制"]),
        c("soak", Verb, &["泡软", "泡发"]),
        c("spread", Verb, &["铺上", "摆入"]),
        c("pour", Verb, &["淋上", "淋在"]),
        c("sprinkle", Verb, &["撒上"]),
        c("plate", Verb, &["装盘", "出锅"]),
        c("beat", Verb, &["打散"]),
        c("pork", Ingredient, &["五花肉", "猪肉"]),
        c("crucian", Ingredient, &["鲫鱼"]),
        c("sugar", Ingredient, &["冰糖", "白糖"]),
        c("soy", Ingredient, &["生抽", "老抽"]),
        c("wine", Ingredient, &["料酒"]),
        c("ginger", Ingredient, &["姜片"]),
        c("scallion", Ingredient, &["葱段", "葱花"]),
        c("garlic", Ingredient, &["蒜蓉"]),
        c("vermicelli", Ingredient, &["粉丝"]),
        c("baby_cabbage", Ingredient, &["娃娃菜"]),
        c("scallop", Ingredient, &["扇贝"]),
        c("green_bean", Ingredient, &["四季豆"]),
        c("minced_pork", Ingredient, &["肉末"]),
        c("olive_veg", Ingredient, &["榄菜"]),
        c("water", Ingredient, &["清水", "开水"]),
        c("salt", Ingredient, &["盐"]),
        c("egg", Ingredient, &["鸡蛋"]),
        c("tomato", Ingredient, &["西红柿", "番茄"]),
        c("tofu", Ingredient, &["豆腐"]),
        c("chili", Ingredient, &["辣椒"]),
        c("oil", Ingredient, &["热油", "油"]),
        c("wok", Tool, &["炒锅", "锅"]),
        c("plate_dish", Tool, &["盘子", "盘"]),
        c("steamer", Tool, &["蒸锅"]),
    ])
    .expect("fixture glossary is valid")
}

fn ingredient(name: &str, class: &str) -> IngredientRef {
    IngredientRef {
        name: name.into(),
        class_id: ClassId::new(class),
    }
}

pub fn pairs() -> Vec<DishPair> {
    vec![
        DishPair {
            pair_id: "braise-fish".into(),
            base_dish: "红烧肉".into(),
            target_dish: "红烧鲫鱼".into(),
            change_kind: ChangeKind::Replace,
            removed_ingredient: Some(ingredient("猪肉", "pork")),
            added_ingredient: ingredient("鲫鱼", "crucian"),
        },
        DishPair {
            pair_id: "garlic-scallop".into(),
            base_dish: "蒜蓉粉丝娃娃菜".into(),
            target_dish: "蒜蓉粉丝扇贝".into(),
            change_kind: ChangeKind::Replace,
            removed_ingredient: Some(ingredient("娃娃菜", "baby_cabbage")),
            added_ingredient: ingredient("扇贝", "scallop"),
        },
        DishPair {
            pair_id: "olive-beans".into(),
            base_dish: "肉末四季豆".into(),
            target_dish: "榄菜肉末四季豆".into(),
            change_kind: ChangeKind::Add,
            removed_ingredient: None,
            added_ingredient: ingredient("榄菜", "olive_veg"),
        },
    ]
}

/// One optional step: its phrasings, its probability, and optionally a lower
/// probability used when an earlier step (by index) was skipped.
struct Step {
    variants: &'static [&'static str],
    p: f64,
    unless: Option<(usize, f64)>,
}

const fn step(variants: &'static [&'static str], p: f64) -> Step {
    Step {
        variants,
        p,
        unless: None,
    }
}

const fn dep(variants: &'static [&'static str], p: f64, on: usize, p_without: f64) -> Step {
    Step {
        variants,
        p,
        unless: Some((on, p_without)),
    }
}

fn template(dish: &str) -> Vec<Step> {
    match dish {
        "红烧肉" => vec![
            step(&["五花肉切块", "猪肉洗净，切成小块"], 0.95),
            step(&["冷水下锅焯水，捞出沥干", "猪肉焯水，捞出"], 0.7),
            step(&["锅中放油，加入冰糖炒出糖色", "炒锅烧热，放入白糖，小火炒至融化"], 0.8),
            step(&["放入五花肉翻炒上色", "倒入猪肉，翻炒均匀"], 0.95),
            step(&["加入生抽、老抽和料酒", "加入料酒和生抽"], 0.8),
            step(&["放入姜片和葱段"], 0.6),
            step(&["加入清水没过肉，小火炖一小时", "倒入开水，转小火焖一小时"], 0.9),
            step(&["大火收汁，出锅装盘", "收汁后装盘"], 0.7),
        ],
        "红烧鲫鱼" => vec![
            step(&["鲫鱼洗净，两面划几刀", "鲫鱼清洗干净，擦干水分"], 0.8),
            step(&["用料酒和盐腌制十分钟", "加入料酒和盐腌制一会"], 0.5),
            dep(&["锅中放油，将鲫鱼煎至两面金黄", "炒锅烧热放油，放入鲫鱼，煎至金黄"], 0.95, 0, 0.0),
            step(&["加入冰糖炒出糖色"], 0.07),
            step(&["放入辣椒"], 0.08),
            step(&["放入姜片和葱段炒香", "加入姜片和葱段"], 0.7),
            step(&["加入生抽、老抽和白糖", "加入生抽和白糖"], 0.85),
            dep(&["倒入清水，小火炖十五分钟", "加入开水，小火焖十五分钟"], 0.9, 2, 0.05),
            step(&["撒上葱花，出锅", "出锅装盘，撒上葱花"], 0.6),
        ],
        "蒜蓉粉丝娃娃菜" => vec![
            step(&["粉丝用温水泡软", "粉丝提前泡发"], 0.9),
            step(&["娃娃菜洗净，切成四瓣", "娃娃菜清洗干净，切成条"], 0.9),
            step(&["娃娃菜摆入盘中，铺上粉丝", "将娃娃菜摆入盘子，铺上粉丝"], 0.85),
            step(&["蒜蓉加入生抽和盐拌匀", "蒜蓉中加入生抽"], 0.8),
            step(&["将蒜蓉淋在娃娃菜上", "蒜蓉淋在粉丝上"], 0.8),
            step(&["放入蒸锅蒸八分钟", "上蒸锅大火蒸十分钟"], 0.9),
            step(&["撒上葱花，淋上热油", "出锅后撒上葱花"], 0.7),
        ],
        "蒜蓉粉丝扇贝" => vec![
            step(&["粉丝用温水泡软", "粉丝提前泡发"], 0.9),
            step(&["扇贝刷洗干净，取出贝肉", "扇贝清洗干净"], 0.85),
            dep(&["扇贝摆入盘中，铺上粉丝", "将扇贝摆入盘子，铺上粉丝"], 0.9, 1, 0.0),
            step(&["蒜蓉加入生抽和盐拌匀", "蒜蓉中加入生抽"], 0.8),
            step(&["将蒜蓉淋在扇贝上", "蒜蓉淋在粉丝上"], 0.85),
            step(&["放入蒸锅蒸六分钟", "上蒸锅大火蒸五分钟"], 0.9),
            step(&["撒上葱花，淋上热油", "出锅后撒上葱花"], 0.7),
        ],
        "肉末四季豆" => vec![
            step(&["四季豆洗净，切段", "四季豆清洗干净，切成小段"], 0.9),
            step(&["四季豆焯水，捞出", "冷水下锅，四季豆焯水"], 0.6),
            step(&["锅中放油，将四季豆煎至表皮起皱", "炒锅放油，放入四季豆，煎至起皱"], 0.8),
            step(&["放入肉末翻炒", "加入肉末，炒至变色"], 0.9),
            step(&["加入蒜蓉和辣椒炒香", "放入蒜蓉和辣椒"], 0.7),
            step(&["加入生抽和盐", "加入盐和生抽翻炒均匀"], 0.8),
            step(&["出锅装盘", "翻炒均匀后出锅"], 0.6),
        ],
        "榄菜肉末四季豆" => vec![
            step(&["四季豆洗净，切段", "四季豆清洗干净，切成小段"], 0.9),
            step(&["四季豆焯水，捞出", "冷水下锅，四季豆焯水"], 0.6),
            step(&["锅中放油，将四季豆煎至表皮起皱", "炒锅放油，放入四季豆，煎至起皱"], 0.8),
            step(&["放入肉末翻炒", "加入肉末，炒至变色"], 0.9),
            dep(&["加入榄菜翻炒均匀", "放入榄菜炒香"], 0.9, 3, 0.0),
            step(&["加入蒜蓉和辣椒炒香", "放入蒜蓉和辣椒"], 0.7),
            step(&["加入生抽", "加入少许生抽翻炒均匀"], 0.7),
            step(&["出锅装盘", "翻炒均匀后出锅"], 0.6),
        ],
        "番茄炒蛋" => vec![
            step(&["鸡蛋打散", "鸡蛋加盐打散"], 0.95),
            step(&["番茄切块", "西红柿洗净，切成小块"], 0.95),
            step(&["锅中放油，倒入鸡蛋炒熟盛出", "炒锅放油，炒鸡蛋"], 0.9),
            step(&["放入番茄翻炒出汁", "倒入西红柿翻炒"], 0.95),
            step(&["加入白糖和盐", "加入盐调味"], 0.8),
            step(&["倒入鸡蛋翻炒均匀，出锅", "加入鸡蛋，翻炒后装盘"], 0.9),
        ],
        "麻婆豆腐" => vec![
            step(&["豆腐切块，焯水", "豆腐切成小块"], 0.9),
            step(&["锅中放油，放入肉末炒香", "炒锅放油，炒肉末"], 0.8),
            step(&["加入蒜蓉和辣椒炒香", "放入辣椒翻炒"], 0.85),
            step(&["放入豆腐，加入清水", "倒入豆腐和开水"], 0.9),
            step(&["小火炖五分钟", "焖三分钟"], 0.8),
            step(&["撒上葱花，出锅", "出锅装盘"], 0.7),
        ],
        "清蒸鲫鱼" => vec![
            step(&["鲫鱼洗净", "鲫鱼清洗干净"], 0.95),
            step(&["放上姜片和葱段，加入料酒", "鲫鱼用料酒腌制"], 0.8),
            step(&["放入蒸锅蒸十分钟", "上蒸锅蒸八分钟"], 0.95),
            step(&["淋上生抽，撒上葱花", "淋上热油"], 0.8),
        ],
        other => panic!("no template for {other}"),
    }
}

const DISH_SIZES: [(&str, usize); 9] = [
    ("红烧肉", 60),
    ("红烧鲫鱼", 60),
    ("蒜蓉粉丝娃娃菜", 60),
    ("蒜蓉粉丝扇贝", 60),
    ("肉末四季豆", 60),
    ("榄菜肉末四季豆", 60),
    ("番茄炒蛋", 30),
    ("麻婆豆腐", 30),
    ("清蒸鲫鱼", 30),
];

fn sample_recipe(dish: &str, id: &str, title: &str, rng: &mut ChaCha8Rng) -> RecipeText {
    let steps = template(dish);
    let mut taken = vec![false; steps.len()];
    let mut out = Vec::new();
    for (i, s) in steps.iter().enumerate() {
        let p = match s.unless {
            Some((on, p_without)) if !taken[on] => p_without,
            _ => s.p,
        };
        if rng.gen_bool(p) {
            taken[i] = true;
            out.push(s.variants[rng.gen_range(0..s.variants.len())].to_string());
        }
    }
    if out.is_empty() {
        out.push(steps[0].variants[0].to_string());
    }
    let mut r = RecipeText::new(id, Some(dish), out);
    r.title = title.to_string();
    r
}

pub fn corpus() -> Vec<RecipeText> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, "fixture/corpus"));
    let prefixes = ["", "家常", "正宗", "简易"];
    let mut out = Vec::new();
    for (d, (dish, n)) in DISH_SIZES.iter().enumerate() {
        for i in 0..*n {
            let id = format!("d{d}-r{i:03}");
            let title = format!("{}{dish}", prefixes[i % prefixes.len()]);
            out.push(sample_recipe(dish, &id, &title, &mut rng));
        }
    }
    // unlabeled recipes; the first two have titles that map onto dishes
    for (i, (title, like)) in [("私房红烧肉", "红烧肉"), ("番茄炒蛋", "番茄炒蛋"), ("凉拌豆腐", "麻婆豆腐")]
        .iter()
        .enumerate()
    {
        let mut r = sample_recipe(like, &format!("u-{i}"), title, &mut rng);
        r.dish = None;
        out.push(r);
    }
    out
}

fn parse_all(recipes: &[RecipeText], g: &Glossary) -> Vec<ProtoActionSequence> {
    recipes
        .iter()
        .map(|r| parse_recipe(r, g, None, extract_options()).unwrap())
        .collect()
}

// Target-dish steps that a rewrite may borrow, per pair.
fn target_steps(pair_id: &str) -> &'static [&'static str] {
    match pair_id {
        "braise-fish" => &["鲫鱼洗净", "将鲫鱼煎至两面金黄", "倒入清水，小火炖十五分钟"],
        "garlic-scallop" => &["扇贝刷洗干净", "扇贝摆入盘中，铺上粉丝"],
        _ => &["加入榄菜翻炒均匀", "放入榄菜炒香"],
    }
}

/// A crude rule-based "model": substitutes the changed ingredient, sometimes
/// borrows a target-dish step at a random position and sometimes drops a step.
fn rewrite(pair: &DishPair, base: &RecipeText, rng: &mut ChaCha8Rng) -> RecipeText {
    let g = glossary();
    let mut steps: Vec<String> = base.steps.clone();
    if let Some(removed) = &pair.removed_ingredient {
        let forms: Vec<String> = g
            .class(WordKind::Ingredient, &removed.class_id)
            .map(|c| c.surface_forms.iter().cloned().collect())
            .unwrap_or_default();
        for s in &mut steps {
            if rng.gen_bool(0.8) {
                for f in &forms {
                    *s = s.replace(f.as_str(), &pair.added_ingredient.name);
                }
            }
        }
    }
    for t in target_steps(&pair.pair_id) {
        if rng.gen_bool(0.5) {
            let at = rng.gen_range(0..=steps.len());
            steps.insert(at, t.to_string());
        }
    }
    if steps.len() > 2 && rng.gen_bool(0.3) {
        let at = rng.gen_range(0..steps.len());
        steps.remove(at);
    }
    let mut r = RecipeText::new(&format!("gen-{}", base.recipe_id), None, steps);
    r.title = pair.target_dish.clone();
    r
}

pub fn generated(recipes: &[RecipeText]) -> Vec<EvalInstance> {
    let corpus = Corpus::from_recipes(recipes.iter().cloned()).unwrap();
    let pairs = pairs();
    let sp = split(
        &corpus,
        &SplitSpec {
            dish_pairs: pairs.clone(),
            eval_sample_size: EVAL_SAMPLE_SIZE,
            seed: SEED,
        },
    )
    .unwrap();
    let mut out = Vec::new();
    for e in sp.eval {
        let pair = pairs.iter().find(|p| p.pair_id == e.pair_id).unwrap();
        let base = corpus.recipes[&e.base_recipe_id].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, &format!("fixture/gen/{}", base.recipe_id)));
        // every fourth instance is an identity rewrite
        let generated = if out.len() % 4 == 3 {
            let mut g = base.clone();
            g.recipe_id = format!("gen-{}", base.recipe_id);
            g.dish = None;
            g
        } else {
            rewrite(pair, &base, &mut rng)
        };
        out.push(EvalInstance {
            pair_id: e.pair_id,
            base_recipe: base,
            generated_recipe: generated,
        });
    }
    out
}

/// Three votes per queued action of the annotated pair: target-leaning actions
/// mostly "always", base-leaning mostly "does not occur", every third one split.
pub fn annotations(recipes: &[RecipeText]) -> String {
    let g = glossary();
    let pair = pairs().into_iter().find(|p| p.pair_id == ANNOTATED_PAIR).unwrap();
    let of = |dish: &str| -> Vec<RecipeText> {
        recipes.iter().filter(|r| r.dish.as_deref() == Some(dish)).cloned().collect()
    };
    let base = parse_all(&of(&pair.base_dish), &g);
    let target = parse_all(&of(&pair.target_dish), &g);
    let freqs = pair_frequencies(&base, &target).unwrap();
    let cat = categorize(&freqs, &Default::default());
    let seed = derive_seed(SEED, &format!("mine/{}", pair.pair_id));
    let queue = build_annotation_queue(&cat, &target, &base, seed).unwrap();
    let mut out = String::from("action_id,annotator_id,label\n");
    for (k, entry) in queue.iter().enumerate() {
        let f = freqs.iter().find(|f| f.action == entry.action).unwrap();
        let labels = if k % 3 == 2 {
            [Label::AlwaysOccur, Label::SometimesOccur, Label::RarelyOccur]
        } else if f.f_t >= f.f_b {
            [Label::AlwaysOccur, Label::AlwaysOccur, Label::SometimesOccur]
        } else {
            [Label::DoesNotOccur, Label::DoesNotOccur, Label::RarelyOccur]
        };
        for (a, label) in labels.iter().enumerate() {
            let text = serde_json::to_value(label).unwrap();
            out.push_str(&format!("{},annotator-{},{}\n", entry.action_id, a + 1, text.as_str().unwrap()));
        }
    }
    out
}

/// Character vectors: a shared direction plus per-character noise, so phrases
/// sharing most characters end up close. ASCII digits are left unembedded.
pub fn embeddings(recipes: &[RecipeText], extra: &[RecipeText]) -> EmbeddingTable {
    let mut chars = BTreeSet::new();
    for r in recipes.iter().chain(extra) {
        for s in &r.steps {
            chars.extend(s.chars().filter(|c| !c.is_ascii() && !c.is_whitespace()));
        }
    }
    for t in ["鲫鱼洗净", "将鲫鱼煎至两面金黄", "扇贝刷洗干净", "加入榄菜翻炒均匀"] {
        chars.extend(t.chars());
    }
    const DIM: usize = 16;
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, "fixture/embeddings"));
    let mut table = EmbeddingTable::new(DIM).unwrap();
    for c in chars {
        let v: Vec<f64> = (0..DIM)
            .map(|i| {
                let shared: f64 = if i == 0 { 2.0 } else { 0.0 };
                ((shared + normal.sample(&mut rng)) * 1e4).round() / 1e4
            })
            .collect();
        table.insert(c.to_string(), v).unwrap();
    }
    table
}

pub const CONFIG: &str = r#"{
  "corpus": "corpus.jsonl",
  "glossary": "glossary.json",
  "embeddings": "embeddings.txt",
  "pairs": "pairs.json",
  "generated": "generated.jsonl",
  "annotations": { "braise-fish": "annotations/braise-fish.csv" },
  "seed": 2024,
  "eval_sample_size": 8,
  "min_recipes_per_dish": 10,
  "extract": { "carry_forward_ingredients": true },
  "stages": ["parse", "mine", "constraints", "evaluate", "report"],
  "out_dir": "out"
}
"#;

fn jsonl<T: serde::Serialize>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| serde_json::to_string(x).unwrap() + "\n")
        .collect()
}

/// Writes every fixture file under `dir`.
pub fn write_fixture(dir: &Path) {
    let recipes = corpus();
    let instances = generated(&recipes);
    let gen_recipes: Vec<RecipeText> = instances.iter().map(|i| i.generated_recipe.clone()).collect();
    std::fs::create_dir_all(dir.join("annotations")).unwrap();
    std::fs::write(dir.join("corpus.jsonl"), jsonl(&recipes)).unwrap();
    std::fs::write(dir.join("generated.jsonl"), jsonl(&instances)).unwrap();
    std::fs::write(dir.join("glossary.json"), glossary().to_json_string() + "\n").unwrap();
    std::fs::write(
        dir.join("pairs.json"),
        serde_json::to_string_pretty(&pairs()).unwrap() + "\n",
    )
    .unwrap();
    embeddings(&recipes, &gen_recipes).save(dir.join("embeddings.txt")).unwrap();
    std::fs::write(dir.join("annotations").join(format!("{ANNOTATED_PAIR}.csv")), annotations(&recipes)).unwrap();
    std::fs::write(dir.join("config.json"), CONFIG).unwrap();
}

pub fn extract_options() -> ExtractOptions {
    ExtractOptions {
        carry_forward_ingredients: true,
        ..Default::default()
    }
}
