//! Velocity prediction across flow dropouts.
//!
//! While flow quality is good, the pipeline records the last `j` velocities
//! per axis. When quality drops, each recorded entry is extrapolated to the
//! prediction time using an acceleration back-fitted against the newest
//! entry, and the extrapolations are aggregated into one predicted velocity:
//!
//! ```text
//! a[i]           = (v[L] - v[i]) / (t[L] - t[i])   for i < L,   a[L] = 0
//! v_pred[i]      = v[i] + (t_p - t[i]) * a[i]
//! ```
//!
//! where `L` indexes the newest of the `n <= j` entries currently held.

use std::collections::VecDeque;

use thiserror::Error;

use crate::types::Aggregation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredictorError {
    #[error("sample time {t_s} s is not after the newest window entry at {newest_s} s")]
    NonIncreasingTime { t_s: f64, newest_s: f64 },
}

/// One good-quality velocity observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowEntry {
    pub v_mps: f64,
    pub t_s: f64,
}

/// Ring buffer of the most recent good-quality velocities for one axis.
///
/// Entries are strictly increasing in time; the oldest entry is evicted
/// once the buffer holds `capacity` entries.
#[derive(Debug, Clone)]
pub struct VelocityWindow {
    entries: VecDeque<WindowEntry>,
    capacity: usize,
}

impl VelocityWindow {
    /// Creates an empty window holding at most `capacity` entries
    /// (`capacity` is clamped to at least 1).
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: VecDeque::with_capacity(capacity.max(1)),
            capacity: capacity.max(1),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn entries(&self) -> impl Iterator<Item = &WindowEntry> {
        self.entries.iter()
    }

    /// Time of the newest entry, if any.
    pub fn newest_time(&self) -> Option<f64> {
        self.entries.back().map(|e| e.t_s)
    }

    /// Records a good-quality velocity. Evicts the oldest entry when full.
    pub fn record(&mut self, v_mps: f64, t_s: f64) -> Result<(), PredictorError> {
        if let Some(back) = self.entries.back() {
            if t_s <= back.t_s {
                return Err(PredictorError::NonIncreasingTime {
                    t_s,
                    newest_s: back.t_s,
                });
            }
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(WindowEntry { v_mps, t_s });
        Ok(())
    }

    /// Acceleration back-fitted for every entry against the newest one.
    /// The newest entry always gets zero. Empty window yields an empty vec.
    pub fn back_fit_accelerations(&self) -> Vec<f64> {
        let Some(newest) = self.entries.back() else {
            return Vec::new();
        };
        let last = self.entries.len() - 1;
        self.entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                if i == last {
                    0.0
                } else {
                    (newest.v_mps - e.v_mps) / (newest.t_s - e.t_s)
                }
            })
            .collect()
    }

    /// Predicted velocity at `t_p_s`, or `None` when no history exists.
    ///
    /// Each entry is extrapolated with its back-fitted acceleration and the
    /// results are aggregated. The mean is computed as an offset from the
    /// first extrapolation so that identical extrapolations reproduce their
    /// common value exactly.
    pub fn predict(&self, t_p_s: f64, aggregation: Aggregation) -> Option<f64> {
        if self.entries.is_empty() {
            return None;
        }
        let accelerations = self.back_fit_accelerations();
        let predicted: Vec<f64> = self
            .entries
            .iter()
            .zip(&accelerations)
            .map(|(e, a)| e.v_mps + (t_p_s - e.t_s) * a)
            .collect();

        let value = match aggregation {
            Aggregation::Mean => {
                let base = predicted[0];
                let delta_sum: f64 = predicted.iter().map(|p| p - base).sum();
                base + delta_sum / predicted.len() as f64
            }
            Aggregation::LastFit => {
                if predicted.len() >= 2 {
                    predicted[predicted.len() - 2]
                } else {
                    predicted[0]
                }
            }
        };
        Some(value)
    }

    /// True while `t_p_s` is at most `max_horizon_s` past the newest entry
    /// (boundary inclusive). False also for an empty window.
    pub fn within_horizon(&self, t_p_s: f64, max_horizon_s: f64) -> bool {
        match self.entries.back() {
            Some(newest) => t_p_s - newest.t_s <= max_horizon_s,
            None => false,
        }
    }
}
