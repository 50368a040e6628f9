//! Moded logic programs: input-consuming derivations, IC-trees and a
//! termination prover based on quasi-recurrency.

pub mod corpus;
pub mod engine;
pub mod ictree;
pub mod modes;
pub mod program;
pub mod subst;
pub mod term;
pub mod termination;
pub mod unify;
