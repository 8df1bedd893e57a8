//! Translation of hierarchical, non-concurrent UML state machines into
//! coloured Petri nets, with a token-game simulator, a CPN Tools XML
//! emitter and a direct interpreter used to check the translation by
//! bounded trace equivalence.

pub mod smd;
pub mod smdl;
pub mod cpn;
pub mod translate;
pub mod emit;
pub mod oracle;
pub mod mutate;
