//! C ABI veneer (implementation follows).
