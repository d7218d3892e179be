use crate::error::{invalid, Result};
use crate::points::PointSet;

/// Selected candidates, their (possibly pending) feedback, and the batch
/// boundaries.
///
/// Steps are counted from 1 as in `fb(t)`: `fb_marks` holds the number of
/// steps that had been taken when each batch was closed, so feedback is
/// present exactly for steps `1..=last_fb()`.
#[derive(Debug, Clone)]
pub struct History {
    points: PointSet,
    arms: Vec<Option<usize>>,
    feedback: Vec<Option<f64>>,
    fb_marks: Vec<usize>,
}

impl History {
    pub fn new(dim: usize) -> Self {
        History {
            points: PointSet::empty(dim),
            arms: Vec::new(),
            feedback: Vec::new(),
            fb_marks: Vec::new(),
        }
    }

    /// A history whose points were all evaluated in a single closed batch.
    pub fn with_feedback(points: PointSet, y: &[f64]) -> Result<Self> {
        if points.len() != y.len() {
            return Err(invalid(format!(
                "{} points but {} feedback values",
                points.len(),
                y.len()
            )));
        }
        let n = y.len();
        let mut h = History {
            arms: vec![None; n],
            feedback: y.iter().map(|&v| Some(v)).collect(),
            fb_marks: Vec::new(),
            points,
        };
        if n > 0 {
            h.fb_marks.push(n);
        }
        Ok(h)
    }

    /// Records a selection without feedback. `arm` is the candidate index
    /// when the point comes from a finite candidate set.
    pub fn push(&mut self, point: &[f64], arm: Option<usize>) -> Result<()> {
        self.points.push(point)?;
        self.arms.push(arm);
        self.feedback.push(None);
        Ok(())
    }

    /// Closes the current batch with feedback for every step after the last
    /// boundary, in selection order.
    pub fn close_batch(&mut self, values: &[f64]) -> Result<()> {
        let fb = self.last_fb();
        let pending = self.len() - fb;
        if pending == 0 {
            return Err(invalid("no pending selections to close"));
        }
        if values.len() != pending {
            return Err(invalid(format!(
                "batch has {pending} pending steps but {} values were supplied",
                values.len()
            )));
        }
        for (slot, &v) in self.feedback[fb..].iter_mut().zip(values) {
            *slot = Some(v);
        }
        self.fb_marks.push(self.len());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    /// Number of steps with feedback, `fb(t)`.
    pub fn last_fb(&self) -> usize {
        self.fb_marks.last().copied().unwrap_or(0)
    }

    pub fn fb_marks(&self) -> &[usize] {
        &self.fb_marks
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn point(&self, step: usize) -> &[f64] {
        self.points.row(step)
    }

    pub fn arm(&self, step: usize) -> Option<usize> {
        self.arms[step]
    }

    pub fn arms(&self) -> &[Option<usize>] {
        &self.arms
    }

    pub fn feedback(&self, step: usize) -> Option<f64> {
        self.feedback[step]
    }

    /// Feedback values of steps `1..=fb(t)`.
    pub fn observed(&self) -> Vec<f64> {
        self.feedback[..self.last_fb()]
            .iter()
            .map(|v| v.expect("feedback present up to the last boundary"))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }
}
