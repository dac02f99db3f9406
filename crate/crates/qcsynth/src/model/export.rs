//! LP-format text export of an assembled model.
//!
//! Bilinear terms (MINLP/NLP variants) are written in the format's
//! quadratic-expression syntax `[ c x * y ... ]`; linearized variants emit
//! only linear rows. Variable naming is deterministic: `z_k_d`, `G_d_i_j`,
//! `w_d_k_i_l` (1-based `k` and `d`).

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use super::{CircuitModel, ModelError, Row, Sense};

fn var_name(model: &CircuitModel, idx: usize) -> String {
    let lay = &model.layout;
    let m = lay.emb_dim;
    let n_z = lay.n_z();
    let n_ghat = lay.n_ghat();
    if idx < n_z {
        let d = idx / lay.n_gates + 1;
        let k = idx % lay.n_gates + 1;
        format!("z_{k}_{d}")
    } else if idx < n_z + n_ghat {
        let off = idx - n_z;
        let d = off / (m * m) + 1;
        let i = (off / m) % m;
        let j = off % m;
        format!("G_{d}_{i}_{j}")
    } else {
        let off = idx - n_z - n_ghat;
        let dk = off / (m * m);
        let i = (off / m) % m;
        let l = off % m;
        let d = dk / lay.n_gates + 2;
        let k = dk % lay.n_gates + 1;
        format!("w_{d}_{k}_{i}_{l}")
    }
}

fn push_term(out: &mut String, first: &mut bool, coeff: f64, body: &str) {
    if coeff == 0.0 {
        return;
    }
    let mag = coeff.abs();
    if *first {
        if coeff < 0.0 {
            out.push_str("- ");
        }
        *first = false;
    } else if coeff < 0.0 {
        out.push_str(" - ");
    } else {
        out.push_str(" + ");
    }
    if (mag - 1.0).abs() < f64::EPSILON {
        out.push_str(body);
    } else {
        let _ = write!(out, "{mag} {body}");
    }
}

fn write_row(out: &mut String, model: &CircuitModel, row: &Row) {
    let mut expr = String::new();
    let mut first = true;
    for &(v, c) in &row.lin {
        push_term(&mut expr, &mut first, c, &var_name(model, v));
    }
    if !row.quad.is_empty() {
        if !first {
            expr.push(' ');
        }
        expr.push_str("+ [ ");
        let mut qfirst = true;
        for &(a, b, c) in &row.quad {
            let body = format!("{} * {}", var_name(model, a), var_name(model, b));
            push_term(&mut expr, &mut qfirst, c, &body);
        }
        expr.push_str(" ]");
        first = false;
    }
    if first {
        expr.push('0');
    }
    let sense = match row.sense {
        Sense::Eq => "=",
        Sense::Le => "<=",
        Sense::Ge => ">=",
    };
    let _ = write!(out, " {}: ", row.name);
    // Wrap long expressions for readability.
    let mut width = row.name.len() + 3;
    for tok in expr.split(' ') {
        if width + tok.len() + 1 > 240 {
            out.push_str("\n   ");
            width = 3;
        }
        out.push_str(tok);
        out.push(' ');
        width += tok.len() + 1;
    }
    let _ = writeln!(out, "{} {}", sense, row.rhs);
}

/// Renders the model to LP-format text.
pub fn export_to_string(model: &CircuitModel) -> String {
    let lay = &model.layout;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ {} decomposition model: target {}, {} qubits, depth {}, {} input gates",
        model.variant.name(),
        model.catalog.target_name,
        model.n_qubits(),
        model.max_depth,
        model.n_gates(),
    );
    let _ = writeln!(out, "\\ phase: {}", model.phase_set[0]);

    out.push_str("Minimize\n obj: ");
    let mut first = true;
    let mut obj = String::new();
    for d in 1..=lay.max_depth {
        for k in 0..lay.n_gates {
            if model.obj_coeff(k) != 0.0 {
                push_term(
                    &mut obj,
                    &mut first,
                    1.0,
                    &var_name(model, lay.z_index(k, d)),
                );
            }
        }
    }
    let mut width = 6;
    for tok in obj.split(' ') {
        if width + tok.len() + 1 > 240 {
            out.push_str("\n   ");
            width = 3;
        }
        out.push_str(tok);
        out.push(' ');
        width += tok.len() + 1;
    }
    out.push('\n');

    out.push_str("Subject To\n");
    for row in model.constraint_rows() {
        write_row(&mut out, model, &row);
    }

    out.push_str("Bounds\n");
    for d in 1..lay.max_depth {
        for i in 0..lay.emb_dim {
            for j in 0..lay.emb_dim {
                let _ = writeln!(
                    out,
                    " -1 <= {} <= 1",
                    var_name(model, lay.ghat_index(d, i, j))
                );
            }
        }
    }
    if model.variant.is_linearized() {
        for d in 2..=lay.max_depth {
            for k in 0..lay.n_gates {
                for i in 0..lay.emb_dim {
                    for l in 0..lay.emb_dim {
                        let _ = writeln!(
                            out,
                            " -1 <= {} <= 1",
                            var_name(model, lay.aux_index(d, k, i, l))
                        );
                    }
                }
            }
        }
    }
    if !model.variant.is_binary() {
        for d in 1..=lay.max_depth {
            for k in 0..lay.n_gates {
                let _ = writeln!(out, " 0 <= {} <= 1", var_name(model, lay.z_index(k, d)));
            }
        }
    } else {
        out.push_str("Binaries\n");
        let mut line = String::from(" ");
        for d in 1..=lay.max_depth {
            for k in 0..lay.n_gates {
                let name = var_name(model, lay.z_index(k, d));
                if line.len() + name.len() + 1 > 240 {
                    out.push_str(&line);
                    out.push('\n');
                    line = String::from(" ");
                }
                line.push_str(&name);
                line.push(' ');
            }
        }
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

/// Writes the LP-format model to `path`.
pub fn export_model(model: &CircuitModel, path: impl AsRef<Path>) -> Result<(), ModelError> {
    std::fs::write(path, export_to_string(model))?;
    Ok(())
}

const KEYWORDS: [&str; 9] = [
    "minimize", "maximize", "subject", "to", "st", "bounds", "binaries", "generals", "end",
];

/// Counts distinct variable names in LP-format text. Row labels (tokens
/// followed by `:`) and section keywords are excluded.
pub fn count_variables(text: &str) -> usize {
    let mut vars: HashSet<&str> = HashSet::new();
    for raw_line in text.lines() {
        let line = raw_line.trim();
        if line.starts_with('\\') {
            continue;
        }
        // Strip a leading row label.
        let body = match line.find(':') {
            Some(pos) => &line[pos + 1..],
            None => line,
        };
        for tok in body.split_whitespace() {
            let tok = tok.trim_matches(|c| matches!(c, '[' | ']' | '*' | '+' | '-'));
            if tok.is_empty() {
                continue;
            }
            if KEYWORDS.contains(&tok.to_ascii_lowercase().as_str()) {
                continue;
            }
            let first = tok.chars().next().unwrap();
            if first.is_ascii_alphabetic() {
                vars.insert(tok);
            }
        }
    }
    // Section keywords on their own lines were filtered; what remains are
    // variable tokens.
    vars.len()
}
