#![allow(dead_code)]

pub mod enumerate;
pub mod hostgen;
pub mod reference;
