//! JSON annotation and localization-result records.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{Circle, Point};
use crate::localization::{LocalizationResult, PolarContour};

fn bad(reason: impl Into<String>) -> Error {
    Error::Format { kind: "annotation", reason: reason.into() }
}

fn check_circle(name: &str, c: &Circle) -> Result<()> {
    if !(c.cx.is_finite() && c.cy.is_finite() && c.r.is_finite() && c.r > 0.0) {
        return Err(bad(format!("{name} circle must be finite with r > 0")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub cx: f64,
    pub cy: f64,
    pub a: f64,
    pub b: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipsePair {
    pub inner: Ellipse,
    pub outer: Ellipse,
}

/// Ground-truth record for one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotation {
    pub id: String,
    pub pupil_center: [f64; 2],
    pub inner: Circle,
    pub outer: Circle,
    /// Mask image path, relative to the annotation file.
    pub mask_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ellipse: Option<EllipsePair>,
}

impl Annotation {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(bad("empty id"));
        }
        if !self.pupil_center.iter().all(|v| v.is_finite()) {
            return Err(bad("non-finite pupil center"));
        }
        check_circle("inner", &self.inner)?;
        check_circle("outer", &self.outer)?;
        if let Some(e) = &self.ellipse {
            for (name, el) in [("inner", &e.inner), ("outer", &e.outer)] {
                let vals = [el.cx, el.cy, el.a, el.b, el.phi];
                if !vals.iter().all(|v| v.is_finite()) || el.a <= 0.0 || el.b <= 0.0 {
                    return Err(bad(format!("{name} ellipse must be finite with positive axes")));
                }
            }
        }
        Ok(())
    }

    pub fn pupil(&self) -> Point {
        Point::new(self.pupil_center[0], self.pupil_center[1])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let a: Self = serde_json::from_str(text)?;
        a.validate()?;
        Ok(a)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        self.validate()?;
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourRecord {
    pub center: [f64; 2],
    pub radii: Vec<f64>,
}

impl From<&PolarContour> for ContourRecord {
    fn from(c: &PolarContour) -> Self {
        Self { center: [c.center.x, c.center.y], radii: c.radii.clone() }
    }
}

impl ContourRecord {
    pub fn to_contour(&self) -> PolarContour {
        PolarContour {
            center: Point::new(self.center[0], self.center[1]),
            n_angles: self.radii.len(),
            radii: self.radii.clone(),
        }
    }
}

/// Localization outcome for one image; `status` is `"ok"` or `"failed"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationRecord {
    pub id: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pupil_center: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Circle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<Circle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_contour: Option<ContourRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_contour: Option<ContourRecord>,
}

impl LocalizationRecord {
    pub fn success(id: impl Into<String>, r: &LocalizationResult) -> Self {
        Self {
            id: id.into(),
            status: "ok".into(),
            reason: None,
            pupil_center: Some([r.pupil_center.x, r.pupil_center.y]),
            inner: Some(r.inner),
            outer: Some(r.outer),
            inner_contour: Some((&r.inner_contour).into()),
            outer_contour: Some((&r.outer_contour).into()),
        }
    }

    pub fn failure(id: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            status: "failed".into(),
            reason: Some(reason.into()),
            pupil_center: None,
            inner: None,
            outer: None,
            inner_contour: None,
            outer_contour: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    /// Both circles of a successful record.
    pub fn circles(&self) -> Option<(Circle, Circle)> {
        match (self.is_ok(), self.inner, self.outer) {
            (true, Some(i), Some(o)) => Some((i, o)),
            _ => None,
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let r: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if r.status != "ok" && r.status != "failed" {
            return Err(Error::Format { kind: "result", reason: format!("unknown status {:?}", r.status) });
        }
        if r.is_ok() && r.circles().is_none() {
            return Err(Error::Format { kind: "result", reason: "ok record without circles".into() });
        }
        Ok(r)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}
