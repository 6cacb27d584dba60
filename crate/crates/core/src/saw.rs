//! SAW lab (under construction).
