//! Differentiable equivariant layers on a small reverse-mode tape.

mod layout;
mod lift;
mod linear;
mod message_passing;
mod mlp;
mod params;
pub mod tape;

pub use layout::{BiasLayout, CoeffMap, WeightLayout};
pub use lift::{LiftAudit, LiftLayer};
pub use linear::EquivariantLinear;
pub use message_passing::{EdgeIndex, MessagePassing, MpCache};
pub use mlp::EquivariantMlp;
pub use params::{ParamId, ParamStore, Session};
pub use tape::{Tape, Var};

use crate::error::{Error, Result};
use crate::symmetry::FieldType;

/// A feature vector tagged with how it transforms.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldVector<T> {
    values: Vec<T>,
    field_type: FieldType,
}

impl<T> FieldVector<T> {
    pub fn new(values: Vec<T>, field_type: FieldType) -> Result<Self> {
        if values.len() != field_type.total_dim() {
            return Err(Error::Shape { expected: field_type.total_dim(), got: values.len() });
        }
        Ok(Self { values, field_type })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn field_type(&self) -> &FieldType {
        &self.field_type
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }
}
