pub mod symbolic;
pub mod charts;
pub mod formal_weyl;
pub mod moyal;
pub mod wigner;
pub mod numerics;
pub mod verification;
