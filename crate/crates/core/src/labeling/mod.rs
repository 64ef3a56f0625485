//! Labeling protocol: window layout, churn flag, right-censored survival time
//! and loyalty-grade cohort selection.

mod grades;
mod survival;
mod window;

pub use grades::{assign_grades, select_loyal, GradeAssignment, GradeTable, LoyaltyFeatures, DEFAULT_GRADES};
pub use survival::{label_churn, label_survival, ChurnLabel, SurvivalLabel};
pub use window::{make_layout, Interval, WindowLayout, DEFAULT_CHURN_WEEKS, DEFAULT_GAP_WEEKS};
