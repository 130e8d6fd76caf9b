//! Versioned plain-text model files.
//!
//! ```text
//! kfhe-model v1
//! algorithm kfhe
//! variant e
//! scores soft
//! classes 3 setosa versicolor virginica
//! label species
//! features 2
//! feature numeric petal.length
//! feature categorical colour 2 red blue
//! components 2
//! component -
//! tree 3
//! node split 0 num 2.45 1 2 50 100
//! node leaf 1 0 0
//! node leaf 0 0.5 0.5
//! component 0.5
//! tree 1
//! node leaf 0.2 0.3 0.5
//! trace 1
//! step 1 0.04 0.0384 0.9615 0.9615 0.0384 0.04 0
//! end
//! ```
//!
//! Tokens are separated by single spaces. Names are percent-escaped so they
//! never contain spaces, commas or line breaks, and `%` alone is the empty
//! string. A categorical split stores its left-going levels as a 0/1 string.
//! Numbers use the shortest representation that reads back to the same f64,
//! so a loaded model predicts bit-for-bit what the saved one did.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::baselines::{BaggingModel, SammeModel};
use crate::cart::{Node, SplitRule, TreeModel};
use crate::dataset::{FeatureKind, FeatureSpec, Features, Schema};
use crate::ensemble::{KfheModel, Stage, TraceRecord, Variant};
use crate::error::{Error, Result};
use crate::scores::ScoreMatrix;

pub const MAGIC: &str = "kfhe-model v1";

/// Any trained model, plus the class names its indices refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub model: Model,
    pub class_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Kfhe(KfheModel),
    Samme(SammeModel),
    Bagging(BaggingModel),
    Cart(TreeModel),
}

impl Model {
    pub fn algorithm(&self) -> &'static str {
        match self {
            Model::Kfhe(_) => "kfhe",
            Model::Samme(_) => "adaboost",
            Model::Bagging(_) => "bagging",
            Model::Cart(_) => "cart",
        }
    }

    pub fn predict_scores(&self, features: &Features) -> Result<ScoreMatrix> {
        match self {
            Model::Kfhe(m) => m.predict_scores(features),
            Model::Samme(m) => m.predict_scores(features),
            Model::Bagging(m) => m.predict_scores(features),
            Model::Cart(m) => m.predict_scores(features),
        }
    }

    pub fn predict(&self, features: &Features) -> Result<Vec<usize>> {
        Ok(self.predict_scores(features)?.classify())
    }

    pub fn class_count(&self) -> usize {
        match self {
            Model::Kfhe(m) => m.class_count(),
            Model::Samme(m) => m.class_count(),
            Model::Bagging(m) => m.class_count(),
            Model::Cart(m) => m.class_count(),
        }
    }

    /// Number of trees that contribute to a prediction.
    pub fn component_count(&self) -> usize {
        match self {
            Model::Kfhe(m) => m.component_count(),
            Model::Samme(m) => m.stages().len(),
            Model::Bagging(m) => m.trees().len(),
            Model::Cart(_) => 1,
        }
    }

    pub fn schema(&self) -> &Arc<Schema> {
        match self {
            Model::Kfhe(m) => m.initial().schema(),
            Model::Samme(m) => m.schema(),
            Model::Bagging(m) => m.trees()[0].schema(),
            Model::Cart(m) => m.schema(),
        }
    }
}

impl SavedModel {
    pub fn new(model: Model, class_names: Vec<String>) -> Result<Self> {
        if class_names.len() != model.class_count() {
            return Err(Error::LengthMismatch { left: class_names.len(), right: model.class_count() });
        }
        Ok(Self { model, class_names })
    }

    pub fn schema(&self) -> &Arc<Schema> {
        self.model.schema()
    }
}

pub fn escape(s: &str) -> String {
    if s.is_empty() {
        return "%".into();
    }
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '%' | ' ' | ',' | '\n' | '\r' | '\t' => {
                let _ = write!(out, "%{:02X}", ch as u32);
            }
            _ => out.push(ch),
        }
    }
    out
}

pub fn unescape(s: &str) -> Option<String> {
    if s == "%" {
        return Some(String::new());
    }
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = std::str::from_utf8(bytes.get(i + 1..i + 3)?).ok()?;
            out.push(u8::from_str_radix(hex, 16).ok()?);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).ok()
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn to_text(saved: &SavedModel) -> String {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    line(MAGIC.into());
    line(format!("algorithm {}", saved.model.algorithm()));
    if let Model::Kfhe(m) = &saved.model {
        line(format!("variant {}", m.variant().tag()));
        line(format!("scores {}", if m.hard_scores() { "hard" } else { "soft" }));
    }
    let names: Vec<String> = saved.class_names.iter().map(|c| escape(c)).collect();
    line(format!("classes {} {}", names.len(), names.join(" ")));
    let schema = saved.schema();
    line(format!("label {}", escape(&schema.label_name)));
    line(format!("features {}", schema.len()));
    for f in &schema.features {
        match &f.kind {
            FeatureKind::Numeric => line(format!("feature numeric {}", escape(&f.name))),
            FeatureKind::Categorical { levels } => {
                let mut s = format!("feature categorical {} {}", escape(&f.name), levels.len());
                for l in levels {
                    s.push(' ');
                    s.push_str(&escape(l));
                }
                line(s);
            }
        }
    }
    let components: Vec<(Option<f64>, &TreeModel)> = match &saved.model {
        Model::Kfhe(m) => {
            std::iter::once((None, m.initial())).chain(m.stages().iter().map(|s| (Some(s.gain), &s.tree))).collect()
        }
        Model::Samme(m) => m.stages().iter().map(|(t, a)| (Some(*a), t)).collect(),
        Model::Bagging(m) => m.trees().iter().map(|t| (None, t)).collect(),
        Model::Cart(t) => vec![(None, t)],
    };
    line(format!("components {}", components.len()));
    for (weight, tree) in components {
        line(format!("component {}", weight.map_or_else(|| "-".to_string(), num)));
        line(format!("tree {}", tree.nodes().len()));
        for node in tree.nodes() {
            line(match node {
                Node::Leaf { scores } => {
                    let s: Vec<String> = scores.iter().map(|&v| num(v)).collect();
                    format!("node leaf {}", s.join(" "))
                }
                Node::Split { feature, rule, left, right, left_mass, right_mass } => {
                    let rule = match rule {
                        SplitRule::Threshold(t) => format!("num {}", num(*t)),
                        SplitRule::LeftLevels(mask) => {
                            format!("cat {}", mask.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>())
                        }
                    };
                    format!("node split {feature} {rule} {left} {right} {left_mass} {right_mass}")
                }
            });
        }
    }
    if let Model::Kfhe(m) = &saved.model {
        line(format!("trace {}", m.trace().len()));
        for r in m.trace() {
            line(format!(
                "step {} {} {} {} {} {} {} {}",
                r.t,
                num(r.r_y),
                num(r.p_y),
                num(r.k_y),
                num(r.k_w),
                num(r.p_w),
                num(r.train_error),
                r.resets
            ));
        }
    }
    line("end".into());
    out
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
    remaining: usize,
}

impl<'a> Lines<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::ModelFormat { line: self.line, message: message.into() })
    }

    fn next(&mut self) -> Result<Vec<&'a str>> {
        match self.iter.next() {
            Some((i, l)) => {
                self.line = i + 1;
                self.remaining = self.remaining.saturating_sub(1);
                Ok(l.strip_suffix('\r').unwrap_or(l).split(' ').collect())
            }
            None => {
                self.line += 1;
                self.err("unexpected end of input")
            }
        }
    }

    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let toks = self.next()?;
        if toks[0] != key {
            return self.err(format!("expected {key:?}, found {:?}", toks[0]));
        }
        Ok(toks[1..].to_vec())
    }

    fn single(&mut self, key: &str) -> Result<&'a str> {
        let toks = self.keyed(key)?;
        if toks.len() != 1 {
            return self.err(format!("{key} takes one value"));
        }
        Ok(toks[0])
    }

    /// A count that cannot exceed the number of lines left to read.
    fn count(&mut self, key: &str) -> Result<usize> {
        let v = self.single(key)?;
        let n: usize = self.parse(v)?;
        if n > self.remaining {
            return self.err(format!("{key} count {n} exceeds the remaining input"));
        }
        Ok(n)
    }

    fn parse<T: std::str::FromStr>(&self, tok: &str) -> Result<T> {
        match tok.parse() {
            Ok(v) => Ok(v),
            Err(_) => self.err(format!("cannot parse {tok:?}")),
        }
    }

    fn float(&self, tok: &str) -> Result<f64> {
        let v: f64 = self.parse(tok)?;
        if !v.is_finite() {
            return self.err(format!("non-finite number {tok:?}"));
        }
        Ok(v)
    }

    fn name(&self, tok: &str) -> Result<String> {
        match unescape(tok) {
            Some(s) => Ok(s),
            None => self.err(format!("bad escape in {tok:?}")),
        }
    }
}

pub fn from_text(text: &str) -> Result<SavedModel> {
    let mut p = Lines { iter: text.lines().enumerate(), line: 0, remaining: text.lines().count() };
    let magic = p.next()?;
    if magic.join(" ") != MAGIC {
        return p.err("not a kfhe-model v1 file");
    }
    let algorithm = p.single("algorithm")?;
    let (variant, hard) = if algorithm == "kfhe" {
        let v = p.single("variant")?;
        let variant = match Variant::from_tag(v) {
            Some(v) => v,
            None => return p.err(format!("unknown variant {v:?}")),
        };
        let hard = match p.single("scores")? {
            "soft" => false,
            "hard" => true,
            other => return p.err(format!("unknown score mode {other:?}")),
        };
        (Some(variant), hard)
    } else if matches!(algorithm, "adaboost" | "bagging" | "cart") {
        (None, false)
    } else {
        return p.err(format!("unknown algorithm {algorithm:?}"));
    };

    let classes = p.keyed("classes")?;
    let c: usize = p.parse(classes.first().copied().unwrap_or(""))?;
    if c < 2 || classes.len() != c + 1 {
        return p.err("class list does not match its count");
    }
    let class_names = classes[1..].iter().map(|t| p.name(t)).collect::<Result<Vec<_>>>()?;

    let label_tok = p.single("label")?;
    let label_name = p.name(label_tok)?;
    let d = p.count("features")?;
    if d == 0 {
        return p.err("model has no features");
    }
    let mut features = Vec::new();
    for _ in 0..d {
        let toks = p.keyed("feature")?;
        let spec = match toks.as_slice() {
            ["numeric", name] => FeatureSpec { name: p.name(name)?, kind: FeatureKind::Numeric },
            ["categorical", name, count, levels @ ..] => {
                let k: usize = p.parse(count)?;
                if levels.len() != k {
                    return p.err("level list does not match its count");
                }
                let levels = levels.iter().map(|t| p.name(t)).collect::<Result<Vec<_>>>()?;
                FeatureSpec { name: p.name(name)?, kind: FeatureKind::Categorical { levels } }
            }
            _ => return p.err("malformed feature line"),
        };
        features.push(spec);
    }
    let schema = Arc::new(Schema { features, label_name });

    let count = p.count("components")?;
    let mut components = Vec::new();
    for _ in 0..count {
        let w = p.single("component")?;
        let weight = if w == "-" { None } else { Some(p.float(w)?) };
        let nodes = p.count("tree")?;
        let mut list = Vec::new();
        for _ in 0..nodes {
            let toks = p.keyed("node")?;
            let node = match toks.as_slice() {
                ["leaf", scores @ ..] => {
                    Node::Leaf { scores: scores.iter().map(|t| p.float(t)).collect::<Result<Vec<_>>>()? }
                }
                ["split", feature, kind, rule, left, right, lm, rm] => {
                    let rule = match *kind {
                        "num" => SplitRule::Threshold(p.float(rule)?),
                        "cat" => SplitRule::LeftLevels(
                            rule.chars()
                                .map(|ch| match ch {
                                    '0' => Ok(false),
                                    '1' => Ok(true),
                                    _ => p.err("level mask must be 0/1"),
                                })
                                .collect::<Result<Vec<_>>>()?,
                        ),
                        _ => return p.err(format!("unknown split kind {kind:?}")),
                    };
                    Node::Split {
                        feature: p.parse(feature)?,
                        rule,
                        left: p.parse(left)?,
                        right: p.parse(right)?,
                        left_mass: p.parse(lm)?,
                        right_mass: p.parse(rm)?,
                    }
                }
                _ => return p.err("malformed node line"),
            };
            list.push(node);
        }
        let tree = match TreeModel::from_parts(list, c, Arc::clone(&schema)) {
            Ok(t) => t,
            Err(e) => return p.err(e.to_string()),
        };
        components.push((weight, tree));
    }

    let model = match variant {
        Some(variant) => {
            let mut it = components.into_iter();
            let initial = match it.next() {
                Some((None, t)) => t,
                _ => return p.err("first kfhe component must be the unweighted seed tree"),
            };
            let mut stages = Vec::new();
            for (w, tree) in it {
                match w {
                    Some(gain) if (0.0..=1.0).contains(&gain) => stages.push(Stage { tree, gain }),
                    _ => return p.err("kfhe gains must lie in [0, 1]"),
                }
            }
            let steps = p.count("trace")?;
            let mut trace = Vec::new();
            for _ in 0..steps {
                let toks = p.keyed("step")?;
                if toks.len() != 8 {
                    return p.err("trace step needs 8 values");
                }
                trace.push(TraceRecord {
                    t: p.parse(toks[0])?,
                    r_y: p.float(toks[1])?,
                    p_y: p.float(toks[2])?,
                    k_y: p.float(toks[3])?,
                    k_w: p.float(toks[4])?,
                    p_w: p.float(toks[5])?,
                    train_error: p.float(toks[6])?,
                    resets: p.parse(toks[7])?,
                });
            }
            match KfheModel::from_parts(variant, hard, initial, stages, trace) {
                Ok(m) => Model::Kfhe(m),
                Err(e) => return p.err(e.to_string()),
            }
        }
        None => match algorithm {
            "adaboost" => {
                let mut stages = Vec::new();
                for (w, t) in components {
                    match w {
                        Some(a) => stages.push((t, a)),
                        None => return p.err("adaboost stages need a weight"),
                    }
                }
                match SammeModel::from_stages(stages, c, Arc::clone(&schema)) {
                    Ok(m) => Model::Samme(m),
                    Err(e) => return p.err(e.to_string()),
                }
            }
            "bagging" => {
                if components.iter().any(|(w, _)| w.is_some()) {
                    return p.err("bagging trees are unweighted");
                }
                match BaggingModel::from_trees(components.into_iter().map(|(_, t)| t).collect()) {
                    Ok(m) => Model::Bagging(m),
                    Err(e) => return p.err(e.to_string()),
                }
            }
            _ => {
                if components.len() != 1 || components[0].0.is_some() {
                    return p.err("cart model holds exactly one unweighted tree");
                }
                Model::Cart(components.pop().unwrap().1)
            }
        },
    };
    if !matches!(p.next(), Ok(toks) if toks == ["end"]) {
        return p.err("missing end marker");
    }
    if let Some((i, l)) = p.iter.next() {
        if !l.trim().is_empty() || p.iter.any(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::ModelFormat { line: i + 1, message: "content after end marker".into() });
        }
    }
    Ok(SavedModel { model, class_names })
}
