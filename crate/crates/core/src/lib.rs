pub mod cocitation;
pub mod compare;
pub mod corpus;
pub mod export;
pub mod graph;
pub mod heavytail;
pub mod metrics;
pub mod netmetrics;
pub mod pathfinder;
pub mod pipeline;
pub mod synth;
pub mod unionfind;
