//! Free-format LP-file export, for cross-checking programs against external
//! solvers.

use std::io::Write;

use crate::lp::{LinearProgram, Relation};

/// Write the program in the conventional free-format LP interchange syntax
/// (maximize section, subject-to rows named by their constraint group,
/// bounds, end).
pub fn write_lp_format<W: Write>(lp: &LinearProgram, mut w: W) -> std::io::Result<()> {
    writeln!(w, "\\ {}", lp.name)?;
    writeln!(w, "Maximize")?;
    write!(w, " obj:")?;
    let mut any = false;
    for (j, &c) in lp.objective_coeffs().iter().enumerate() {
        if c != 0.0 {
            write!(w, " {} {} {}", if c < 0.0 { "-" } else { "+" }, fmt(c.abs()), lp.var_key(j))?;
            any = true;
        }
    }
    if !any {
        write!(w, " 0 {}", lp.var_key(0))?;
    }
    writeln!(w)?;
    writeln!(w, "Subject To")?;
    for (i, c) in lp.constraints.iter().enumerate() {
        write!(w, " c{}_{}:", i, c.tag.group())?;
        for &(j, coeff) in &c.terms {
            write!(w, " {} {} {}", if coeff < 0.0 { "-" } else { "+" }, fmt(coeff.abs()), lp.var_key(j))?;
        }
        let rel = match c.rel {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        writeln!(w, " {rel} {}", fmt(c.rhs))?;
    }
    writeln!(w, "Bounds")?;
    for j in 0..lp.n_vars() {
        let (lo, hi) = lp.bounds(j);
        if hi.is_finite() {
            writeln!(w, " {} <= {} <= {}", fmt(lo), lp.var_key(j), fmt(hi))?;
        } else {
            writeln!(w, " {} >= {}", lp.var_key(j), fmt(lo))?;
        }
    }
    writeln!(w, "End")?;
    Ok(())
}

fn fmt(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify_mdp;
    use crate::env::{self, ThreeStateScenario};
    use crate::lp::build_lp3;

    #[test]
    fn export_is_parseable_text() {
        let mdp = env::three_state(ThreeStateScenario::Lp0);
        let cls = classify_mdp(&mdp).unwrap();
        let lp = build_lp3(&mdp, &cls, &mdp.specs);
        let mut buf = Vec::new();
        write_lp_format(&lp, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("\\ LP3"));
        assert!(text.contains("Maximize"));
        assert!(text.contains("Subject To"));
        assert!(text.contains("x_s1_a1"));
        assert!(text.contains("c0_i:"));
        assert!(text.trim_end().ends_with("End"));
    }
}
