use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Center-size box in normalized image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub c_x: f64,
    pub c_y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub const fn new(c_x: f64, c_y: f64, w: f64, h: f64) -> Self {
        Self { c_x, c_y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// (x_min, y_min, x_max, y_max)
    pub fn corners(&self) -> (f64, f64, f64, f64) {
        let (hw, hh) = (self.w / 2.0, self.h / 2.0);
        (self.c_x - hw, self.c_y - hh, self.c_x + hw, self.c_y + hh)
    }

    pub fn is_finite(&self) -> bool {
        self.c_x.is_finite() && self.c_y.is_finite() && self.w.is_finite() && self.h.is_finite()
    }
}

/// Intersection over union; 0 for disjoint boxes or a degenerate union.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let (ax0, ay0, ax1, ay1) = a.corners();
    let (bx0, by0, bx1, by1) = b.corners();
    let iw = (ax1.min(bx1) - ax0.max(bx0)).max(0.0);
    let ih = (ay1.min(by1) - ay0.max(by0)).max(0.0);
    let inter = iw * ih;
    let union = a.area().max(0.0) + b.area().max(0.0) - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

/// Loc offsets: plain componentwise differences to the anchor.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LocOffset {
    pub d_cx: f64,
    pub d_cy: f64,
    pub d_w: f64,
    pub d_h: f64,
}

pub fn encode(anchor: &BBox, target: &BBox) -> LocOffset {
    LocOffset {
        d_cx: target.c_x - anchor.c_x,
        d_cy: target.c_y - anchor.c_y,
        d_w: target.w - anchor.w,
        d_h: target.h - anchor.h,
    }
}

pub fn decode(anchor: &BBox, loc: &LocOffset) -> Result<BBox> {
    let w = anchor.w + loc.d_w;
    let h = anchor.h + loc.d_h;
    if !(w > 0.0 && h > 0.0) {
        return Err(Error::DegenerateBox { w, h });
    }
    Ok(BBox {
        c_x: anchor.c_x + loc.d_cx,
        c_y: anchor.c_y + loc.d_cy,
        w,
        h,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub conf: f64,
}
