//! Acceptance criteria for `asp-core`, run as the `acceptance` test target.
