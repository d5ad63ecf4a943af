pub mod abc;
pub mod automata;
pub mod formula;
pub mod pipeline;
pub mod polysys;
pub mod sos;
