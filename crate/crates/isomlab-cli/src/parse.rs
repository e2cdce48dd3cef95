//! Input parsing: norm shorthands, instance files, tolerance overrides.

use std::collections::BTreeMap;
use std::fs;

use isomlab::{FiniteMetricSpace, NormDescriptor};

use crate::error::{usage, CliResult};

/// Parses a norm argument.
///
/// Accepted shorthands: `lp:<p>:<dim>` (with `p = inf` allowed), `l1:<dim>`,
/// `l2:<dim>`, `linf:<dim>`, and `<name>:<dim>` for any name in the built-in
/// catalogue of that dimension (`l4`, `hexagon` at dim 2, `cylinder` and
/// `spindle` at dim 3). Anything else is treated as a path to a norm
/// descriptor JSON file (the way to supply arbitrary polytope or product
/// norms). Returns the norm together with the canonical JSON used for the
/// report digest.
pub fn parse_norm(spec: &str) -> CliResult<(NormDescriptor, String)> {
    let norm = if let Some(rest) = spec.strip_prefix("lp:") {
        let (p_text, dim_text) = rest
            .split_once(':')
            .ok_or_else(|| usage(format!("norm shorthand `{spec}`: expected lp:<p>:<dim>")))?;
        let p = if p_text == "inf" {
            f64::INFINITY
        } else {
            p_text
                .parse::<f64>()
                .map_err(|_| usage(format!("norm shorthand `{spec}`: bad exponent `{p_text}`")))?
        };
        let dim = parse_dim(spec, dim_text)?;
        NormDescriptor::lp(dim, p)
            .map_err(|e| usage(format!("norm shorthand `{spec}`: {e}")))?
    } else if let Some((name, dim_text)) = spec
        .split_once(':')
        .filter(|(name, _)| !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric()))
    {
        let dim = parse_dim(spec, dim_text)?;
        isomlab::norm::builtin_norms(dim)
            .into_iter()
            .find(|(n, _)| n == name)
            .map(|(_, norm)| norm)
            .ok_or_else(|| {
                usage(format!(
                    "norm shorthand `{spec}`: no built-in `{name}` in dimension {dim}"
                ))
            })?
    } else {
        let text = fs::read_to_string(spec)
            .map_err(|e| usage(format!("cannot read norm file `{spec}`: {e}")))?;
        NormDescriptor::from_json_str(&text)
            .map_err(|e| usage(format!("norm file `{spec}`: {e}")))?
    };
    let canonical = serde_json::to_string(&norm).expect("norms serialise");
    Ok((norm, canonical))
}

fn parse_dim(spec: &str, text: &str) -> CliResult<usize> {
    let dim: usize = text
        .parse()
        .map_err(|_| usage(format!("norm shorthand `{spec}`: bad dimension `{text}`")))?;
    if dim == 0 {
        return Err(usage(format!("norm shorthand `{spec}`: dimension must be positive")));
    }
    Ok(dim)
}

/// Loads a finite metric space from its JSON wire file, returning the space
/// and the canonical JSON used for the report digest.
pub fn load_space(path: &str) -> CliResult<(FiniteMetricSpace, String)> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read space file `{path}`: {e}")))?;
    let space = FiniteMetricSpace::from_json_str(&text)
        .map_err(|e| usage(format!("space file `{path}`: {e}")))?;
    Ok((space, text.trim().to_owned()))
}

/// Parses repeated `--tol name=value` overrides. Values must be positive
/// finite reals; names are free-form slugs looked up by each experiment.
pub fn parse_tolerances(args: &[String]) -> CliResult<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for arg in args {
        let (name, value_text) = arg
            .split_once('=')
            .ok_or_else(|| usage(format!("tolerance `{arg}`: expected <name>=<value>")))?;
        if name.is_empty() || name.contains(',') {
            return Err(usage(format!("tolerance `{arg}`: bad name")));
        }
        let value: f64 = value_text
            .parse()
            .map_err(|_| usage(format!("tolerance `{arg}`: bad value `{value_text}`")))?;
        if !(value.is_finite() && value > 0.0) {
            return Err(usage(format!("tolerance `{arg}`: value must be positive and finite")));
        }
        out.insert(name.to_owned(), value);
    }
    Ok(out)
}

/// Parses a comma-separated list of positive finite scale factors.
pub fn parse_lambdas(text: &str) -> CliResult<Vec<f64>> {
    let mut out = Vec::new();
    for piece in text.split(',') {
        let lambda: f64 = piece
            .trim()
            .parse()
            .map_err(|_| usage(format!("scale factor `{piece}` is not a number")))?;
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(usage(format!("scale factor `{piece}` must be positive and finite")));
        }
        out.push(lambda);
    }
    if out.is_empty() {
        return Err(usage("at least one scale factor is required"));
    }
    Ok(out)
}

/// Parses a comma-separated list of positive finite radii.
pub fn parse_radii(text: &str) -> CliResult<Vec<f64>> {
    parse_lambdas(text).map_err(|_| usage(format!("bad radius list `{text}`: expected comma-separated positive reals")))
}
