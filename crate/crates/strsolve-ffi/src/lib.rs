//! C ABI for the strsolve solver (placeholder while the engine lands).
