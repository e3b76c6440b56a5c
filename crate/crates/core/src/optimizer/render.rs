//! Human-readable rendering of programs.

use super::{Bounds, Direction, Program};
use crate::rational::format_rational;

fn bounds_line(bounds: &Bounds) -> Vec<String> {
    bounds
        .iter()
        .map(|(v, b)| {
            if b.integer {
                format!("{v} in {{{}..{}}}", format_rational(&b.lower), format_rational(&b.upper))
            } else {
                format!("{} <= {v} <= {}", format_rational(&b.lower), format_rational(&b.upper))
            }
        })
        .collect()
}

/// `Minimize f subject to c1, c2 and bounds`.
pub fn program(p: &Program) -> String {
    let verb = match p.direction {
        Direction::Minimize => "Minimize",
        Direction::Maximize => "Maximize",
    };
    let mut parts: Vec<String> = p.constraints.iter().map(|c| c.to_string()).collect();
    let used = p.variables();
    let bounds: Bounds = p.bounds.iter().filter(|(v, _)| used.contains(*v)).map(|(v, b)| (v.clone(), b.clone())).collect();
    parts.extend(bounds_line(&bounds));
    let mut out = format!("{verb} {}", p.objective);
    match parts.len() {
        0 => {}
        1 => out.push_str(&format!(" subject to {}", parts[0])),
        k => {
            out.push_str(&format!(" subject to {} and {}", parts[..k - 1].join(", "), parts[k - 1]));
        }
    }
    out
}
