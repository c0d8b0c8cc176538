//! Pretty-printer emitting the same grammar the parser reads.

use std::fmt;

use super::parse::KEYWORD_DEPENDENCIES;
use super::{Atom, DepAtom, Formula, Literal, Term};

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => f.write_str(c),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.atom, self.positive) {
            (Atom::Top, true) => f.write_str("top"),
            (Atom::Top, false) => f.write_str("bot"),
            (Atom::Eq(a, b), true) => write!(f, "{a} = {b}"),
            (Atom::Eq(a, b), false) => write!(f, "{a} != {b}"),
            (Atom::Rel { name, args }, positive) => {
                if !positive {
                    f.write_str("!")?;
                }
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for DepAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.complemented {
            f.write_str("!")?;
        }
        if self.name == "dep" {
            f.write_str("=")?;
        } else if KEYWORD_DEPENDENCIES.contains(&self.name.as_str()) {
            f.write_str(&self.name)?;
        } else {
            write!(f, "atom {}", self.name)?;
        }
        f.write_str("(")?;
        for (i, group) in self.groups().iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            for (j, v) in group.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{v}")?;
            }
        }
        f.write_str(")")?;
        if let Some(p) = &self.relativized {
            write!(f, "@{p}")?;
        }
        Ok(())
    }
}

fn is_atomic(phi: &Formula) -> bool {
    matches!(phi, Formula::Lit(_) | Formula::Dep(_))
}

/// Prints `phi`, wrapping it in parentheses unless it is atomic or prefix-unary.
fn operand(f: &mut fmt::Formatter<'_>, phi: &Formula) -> fmt::Result {
    match phi {
        _ if is_atomic(phi) => write!(f, "{phi}"),
        Formula::Diamond(_) | Formula::ContraNeg(_) => write!(f, "{phi}"),
        _ => write!(f, "({phi})"),
    }
}

/// Like [`operand`], but also brackets equalities: `dia (x != y)`.
fn prefix_operand(f: &mut fmt::Formatter<'_>, phi: &Formula) -> fmt::Result {
    match phi {
        Formula::Lit(Literal { atom: Atom::Eq(..), .. }) => write!(f, "({phi})"),
        _ => operand(f, phi),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Lit(l) => write!(f, "{l}"),
            Formula::Dep(d) => write!(f, "{d}"),
            Formula::And(a, b) | Formula::TensorOr(a, b) | Formula::GlobalOr(a, b) => {
                let op = match self {
                    Formula::And(..) => "/\\",
                    Formula::TensorOr(..) => "\\/",
                    _ => "lor",
                };
                operand(f, a)?;
                write!(f, " {op} ")?;
                operand(f, b)
            }
            Formula::Diamond(a) => {
                f.write_str("dia ")?;
                prefix_operand(f, a)
            }
            Formula::ContraNeg(a) => {
                f.write_str("~")?;
                prefix_operand(f, a)
            }
            Formula::Exists(vs, body) | Formula::Forall(vs, body) => {
                f.write_str(if matches!(self, Formula::Exists(..)) { "exists" } else { "forall" })?;
                for v in vs {
                    write!(f, " {v}")?;
                }
                f.write_str(" . ")?;
                write!(f, "{body}")
            }
        }
    }
}
