//! Experiment harness (under construction).
