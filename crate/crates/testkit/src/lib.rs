//! Reference implementations used only by tests.
//!
//! Everything here takes a different route to the answer than the library:
//! corridor tests are done in the corridor's own frame with polygon clipping,
//! the flight line is sampled rather than projected, and routes are found by
//! exhaustive depth-first enumeration instead of A*.

pub mod los;
pub mod routing;
