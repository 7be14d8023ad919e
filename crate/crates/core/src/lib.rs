//! Evolutionary games on contact networks where agents choose game partners
//! with a bias toward stronger or weaker neighbours.
//!
//! The crate covers network generation ([`topology`]), the two games
//! ([`game`]), the generation loop ([`engine`]), heritable biases
//! ([`coevolution`]), measurements ([`observables`]) and sweep orchestration
//! with file output ([`experiment`]).

pub mod coevolution;
pub mod engine;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod game;
pub mod observables;
pub mod rng;
pub mod topology;

pub use error::{Error, Result};
