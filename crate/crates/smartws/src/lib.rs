//! Hosting, invoking and orchestrating semantic web services: description
//! files, the HTTP transport, live maturity probes, the mock scenario
//! services and the command-line front end.

pub mod cli;
pub mod files;
pub mod probe;
pub mod report;
pub mod scenario;
pub mod transport;
