//! Axis-aligned pixel boxes in MOTChallenge convention (left, top, width, height).

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox<T> {
    pub left: T,
    pub top: T,
    pub width: T,
    pub height: T,
}

impl<T: Scalar> BBox<T> {
    pub fn new(left: T, top: T, width: T, height: T) -> Self {
        Self {
            left,
            top,
            width,
            height,
        }
    }

    pub fn from_center(cx: T, cy: T, width: T, height: T) -> Self {
        let half = T::lit(0.5);
        Self::new(cx - half * width, cy - half * height, width, height)
    }

    pub fn center(&self) -> (T, T) {
        let half = T::lit(0.5);
        (self.left + half * self.width, self.top + half * self.height)
    }

    pub fn right(&self) -> T {
        self.left + self.width
    }

    pub fn bottom(&self) -> T {
        self.top + self.height
    }

    /// Area, zero for degenerate boxes.
    pub fn area(&self) -> T {
        if self.width > T::zero() && self.height > T::zero() {
            self.width * self.height
        } else {
            T::zero()
        }
    }

    pub fn intersection_area(&self, other: &Self) -> T {
        let w = self.right().min(other.right()) - self.left.max(other.left);
        let h = self.bottom().min(other.bottom()) - self.top.max(other.top);
        if w > T::zero() && h > T::zero() {
            w * h
        } else {
            T::zero()
        }
    }

    pub fn cast<U: Scalar>(&self) -> BBox<U> {
        BBox {
            left: U::lit(self.left.to_f64_lossy()),
            top: U::lit(self.top.to_f64_lossy()),
            width: U::lit(self.width.to_f64_lossy()),
            height: U::lit(self.height.to_f64_lossy()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_round_trip() {
        let b = BBox::new(10.0, 20.0, 30.0, 40.0);
        let (cx, cy) = b.center();
        assert_eq!((cx, cy), (25.0, 40.0));
        assert_eq!(BBox::from_center(cx, cy, 30.0, 40.0), b);
    }

    #[test]
    fn intersection_of_touching_boxes_is_zero() {
        let a = BBox::new(0.0, 0.0, 10.0, 10.0);
        let b = BBox::new(10.0, 0.0, 10.0, 10.0);
        assert_eq!(a.intersection_area(&b), 0.0);
        assert_eq!(a.intersection_area(&a), 100.0);
    }
}
