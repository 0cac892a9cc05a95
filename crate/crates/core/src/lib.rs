pub mod bundle;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod lp;
pub mod mdp;
pub mod numeric;
pub mod plot;
pub mod reward;
pub mod separability;
pub mod soap;
pub mod verifier;
