//! Wulff geometry (under construction).
