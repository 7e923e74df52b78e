//! Line-oriented model files.
//!
//! ```text
//! # comment
//! model <name> transform=<fourier|laplace> d=<int>
//! term n=<order> w=<weight> a=<a1,...,an>
//! ```
//!
//! One `term` line per quadrature node; `d=0` means no dimension hint.

use std::path::Path;

use maxkin_core::model::{InteractionTerm, MaxwellModel, TermNode, TransformKind};

use crate::run::RunError;

pub fn read_model(path: &Path) -> Result<MaxwellModel, RunError> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}

pub fn parse_model(text: &str) -> Result<MaxwellModel, RunError> {
    let err = |line: usize, message: String| RunError::Config { line, message };
    let mut transform = None;
    let mut dimension_hint = None;
    // nodes grouped by order
    let mut by_order: Vec<(usize, Vec<TermNode>)> = Vec::new();
    let mut saw_header = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("model") => {
                if saw_header {
                    return Err(err(line_no, "duplicate model header".into()));
                }
                saw_header = true;
                let _name = tokens
                    .next()
                    .ok_or_else(|| err(line_no, "model header needs a name".into()))?;
                for attr in tokens {
                    if let Some(v) = attr.strip_prefix("transform=") {
                        transform = Some(match v {
                            "fourier" => TransformKind::Fourier,
                            "laplace" => TransformKind::Laplace,
                            other => {
                                return Err(err(line_no, format!("unknown transform {other:?}")))
                            }
                        });
                    } else if let Some(v) = attr.strip_prefix("d=") {
                        let d: u32 = v
                            .parse()
                            .map_err(|_| err(line_no, format!("invalid dimension {v:?}")))?;
                        dimension_hint = (d > 0).then_some(d);
                    } else {
                        return Err(err(line_no, format!("unknown model attribute {attr:?}")));
                    }
                }
                if transform.is_none() {
                    return Err(err(line_no, "model header needs transform=<fourier|laplace>".into()));
                }
            }
            Some("term") => {
                if !saw_header {
                    return Err(err(line_no, "term line before model header".into()));
                }
                let mut order = None;
                let mut weight = None;
                let mut scales: Option<Vec<f64>> = None;
                for attr in tokens {
                    if let Some(v) = attr.strip_prefix("n=") {
                        order = Some(
                            v.parse::<usize>()
                                .map_err(|_| err(line_no, format!("invalid order {v:?}")))?,
                        );
                    } else if let Some(v) = attr.strip_prefix("w=") {
                        weight = Some(
                            v.parse::<f64>()
                                .map_err(|_| err(line_no, format!("invalid weight {v:?}")))?,
                        );
                    } else if let Some(v) = attr.strip_prefix("a=") {
                        scales = Some(
                            v.split(',')
                                .map(|t| {
                                    t.parse::<f64>()
                                        .map_err(|_| err(line_no, format!("invalid scale {t:?}")))
                                })
                                .collect::<Result<_, _>>()?,
                        );
                    } else {
                        return Err(err(line_no, format!("unknown term attribute {attr:?}")));
                    }
                }
                let order = order.ok_or_else(|| err(line_no, "term needs n=<order>".into()))?;
                let weight = weight.ok_or_else(|| err(line_no, "term needs w=<weight>".into()))?;
                let scales = scales.ok_or_else(|| err(line_no, "term needs a=<scales>".into()))?;
                if scales.len() != order {
                    return Err(err(
                        line_no,
                        format!("term declares n={order} but lists {} scales", scales.len()),
                    ));
                }
                let node = TermNode { weight, scales };
                match by_order.iter_mut().find(|(o, _)| *o == order) {
                    Some((_, nodes)) => nodes.push(node),
                    None => by_order.push((order, vec![node])),
                }
            }
            Some(other) => return Err(err(line_no, format!("unknown directive {other:?}"))),
            None => unreachable!(),
        }
    }
    if !saw_header {
        return Err(err(0, "missing model header".into()));
    }
    let terms = by_order
        .into_iter()
        .map(|(order, nodes)| InteractionTerm::new(order, nodes))
        .collect::<Result<Vec<_>, _>>()
        .map_err(RunError::Model)?;
    MaxwellModel::custom(terms, transform.expect("checked above"), dimension_hint)
        .map_err(RunError::Model)
}

pub fn write_model(model: &MaxwellModel, name: &str) -> String {
    let mut out = String::new();
    let transform = match model.transform {
        TransformKind::Fourier => "fourier",
        TransformKind::Laplace => "laplace",
    };
    out.push_str(&format!(
        "model {name} transform={transform} d={}\n",
        model.dimension_hint.unwrap_or(0)
    ));
    for term in &model.terms {
        for node in &term.nodes {
            let scales: Vec<String> = node.scales.iter().map(|a| format!("{a:.17e}")).collect();
            out.push_str(&format!(
                "term n={} w={:.17e} a={}\n",
                term.order,
                node.weight,
                scales.join(",")
            ));
        }
    }
    out
}
