//! Simulation and statistics of planar Poisson line and STIT tessellations.
//!
//! * [`geometry`]: convex polygons, lines and windows.
//! * [`tessgen`]: realizations of both models in a rectangular window.
//! * [`complex`]: vertices, edges and cell adjacency recovered from the cells.
//! * [`cellstats`]: typical-cell and neighbourhood means under minus sampling.
//! * [`secondorder`]: K, pair- and mark-correlation of the cell centres.

pub mod cellstats;
pub mod complex;
pub mod error;
pub mod geometry;
pub mod secondorder;
pub mod stats;
pub mod tessgen;

pub use error::{Error, Result};
pub use geometry::{ConvexPolygon, Line, Point2, RectWindow, Segment};
pub use tessgen::{DirectionLaw, Model, RngStream, Tessellation};
