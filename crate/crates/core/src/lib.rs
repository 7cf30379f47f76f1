//! Adaptive censoring codec for sequences of positive integers, with the
//! envelope-class bounds and Monte-Carlo experiments that go with it.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod bitio;
pub mod bounds;
pub mod codec;
pub mod elias;
pub mod error;
pub mod lab;
pub mod model;
pub mod sources;

pub use bounds::{BoundCurve, BoundKind};
pub use codec::{
    decode_message, decode_with_length, encode_message, encode_with_trace, EncodeTrace,
    StreamDecoder, StreamEncoder,
};
pub use error::{Error, Result};
pub use lab::{ExperimentConfig, MaxReport, RedundancyReport};
pub use model::{CensorModel, Censored};
pub use sources::{Envelope, EnvelopeSpec, SourceDist};
