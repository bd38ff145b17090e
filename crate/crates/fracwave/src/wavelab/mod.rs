//! (implementation follows)
