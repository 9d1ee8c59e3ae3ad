//! Thin wrapper over `meval` for user-supplied scalar expressions.

use std::sync::Arc;

use crate::error::{Error, Result};

pub(crate) type ScalarFn = Arc<dyn Fn(&[f64]) -> f64>;

/// Compile an expression over the named variables (1 to 3 of them).
pub(crate) fn compile(text: &str, vars: &[&str]) -> Result<ScalarFn> {
    let expr: meval::Expr = text
        .parse()
        .map_err(|e| Error::Parse(format!("bad expression {text:?}: {e}")))?;
    let err = |e: meval::Error| {
        Error::Parse(format!("expression {text:?} must use variables {vars:?}: {e}"))
    };
    match vars {
        [a] => {
            let f = expr.bind(a).map_err(err)?;
            Ok(Arc::new(move |x: &[f64]| f(x[0])))
        }
        [a, b] => {
            let f = expr.bind2(a, b).map_err(err)?;
            Ok(Arc::new(move |x: &[f64]| f(x[0], x[1])))
        }
        [a, b, c] => {
            let f = expr.bind3(a, b, c).map_err(err)?;
            Ok(Arc::new(move |x: &[f64]| f(x[0], x[1], x[2])))
        }
        _ => Err(Error::InvalidParam("expressions take 1 to 3 variables".into())),
    }
}

/// Split `text` on commas that are not nested inside parentheses, so expression
/// lists like `expr:0.5*(1-cos(2*pi*y)),pi*sin(2*pi*y),...` parse unambiguously.
pub(crate) fn split_top_level(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}
