pub mod chains;
pub mod cho2;
pub mod ensembles;
pub mod fieldtheory;
pub mod numerics;
pub mod rotor2;
pub mod scenario;
