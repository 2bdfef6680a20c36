//! Phoneme-level analysis of how far synthetic speech drifts from real speech.
//!
//! The pipeline segments force-aligned corpora into phoneme tokens, pools
//! frame features per token, fits Gaussians per phoneme, measures symmetric
//! KL divergence between real and synthetic populations, trains per-phoneme
//! linear classifiers, and correlates divergence with detectability.

pub mod audio;
pub mod classify;
pub mod config;
pub mod corpus;
pub mod features;
pub mod pipeline;
pub mod report;
pub mod stats;
pub mod textgrid;
