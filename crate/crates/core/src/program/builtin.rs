//! Builtin predicates, modelled as (infinite) tables of ground facts with
//! every position in input mode.
//!
//! An atom is resolvable against the table only when it already equals a
//! fact, so resolution never binds a variable. If some instance of the atom
//! could still match a fact the atom is suspended; if none can it fails.

use crate::term::Term;

use super::{Atom, Mode, Pred};

/// Supported builtins: name and arity.
pub const BUILTINS: &[(&str, usize)] = &[
    ("<", 2),
    (">", 2),
    ("=<", 2),
    ("<=", 2),
    ("\\=", 2),
    ("constant", 1),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinStatus {
    /// Sufficiently instantiated: the atom is (true) or is not (false) a fact.
    Decided(bool),
    /// Unifies with some fact but is not yet an instance of one.
    Suspended,
}

pub fn is_builtin(pred: &Pred) -> bool {
    BUILTINS
        .iter()
        .any(|(n, a)| *n == &*pred.name && *a == pred.arity)
}

pub fn builtin_mode(pred: &Pred) -> Option<Mode> {
    is_builtin(pred).then(|| Mode::all_in(pred.arity))
}

/// Decision procedure for a builtin atom. Panics if `atom` is not a builtin.
pub fn evaluate_builtin(atom: &Atom) -> BuiltinStatus {
    match (&*atom.pred, atom.args.as_slice()) {
        (op @ ("<" | ">" | "=<" | "<="), [a, b]) => compare(op, a, b),
        ("\\=", [a, b]) => {
            if a.is_ground() && b.is_ground() {
                BuiltinStatus::Decided(a != b)
            } else if a == b {
                // every instance has equal arguments
                BuiltinStatus::Decided(false)
            } else {
                BuiltinStatus::Suspended
            }
        }
        ("constant", [t]) => match t {
            Term::Var(_) => BuiltinStatus::Suspended,
            t => BuiltinStatus::Decided(t.is_constant()),
        },
        _ => panic!("{} is not a builtin", atom.key()),
    }
}

fn compare(op: &str, a: &Term, b: &Term) -> BuiltinStatus {
    match (a, b) {
        (Term::Int(m), Term::Int(n)) => BuiltinStatus::Decided(match op {
            "<" => m < n,
            ">" => m > n,
            _ => m <= n,
        }),
        // a non-variable, non-integer argument never matches an integer fact
        (Term::App(..), _) | (_, Term::App(..)) => BuiltinStatus::Decided(false),
        _ => BuiltinStatus::Suspended,
    }
}
