pub mod asympt;
pub mod error;
pub mod extension;
pub mod numeric;
pub mod resolvent;
pub mod specfun;
pub mod spectrum;
pub mod verify;
pub mod zeta_heat;
