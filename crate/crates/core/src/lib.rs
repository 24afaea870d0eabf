//! Hybrid task planning for household agents.
//!
//! * [`pddl`]: typed-STRIPS parsing, grounding and plan validation.
//! * [`search`]: width-based best-first search plus a breadth-first oracle.
//! * [`world`]: the agent's partially observed scene graph.
//! * [`sim`]: a deterministic household text-world and bundled task suites.
//! * [`llm`]: completion clients, goal generation and next-action prediction.
//! * [`controller`]: the episode loop combining symbolic plans with model predictions.

pub mod controller;
pub mod llm;
pub mod pddl;
pub mod search;
pub mod sim;
pub mod world;

