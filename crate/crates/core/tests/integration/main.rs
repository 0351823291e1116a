mod cli;
mod oracles;
mod properties;
