// Each guide chapter becomes a module so its code blocks run as doctests and
// a failure points at the chapter it came from.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}
#[doc = include_str!("../../../book/src/libraries.md")]
mod libraries {}
#[doc = include_str!("../../../book/src/netlists.md")]
mod netlists {}
#[doc = include_str!("../../../book/src/verilog.md")]
mod verilog {}
#[doc = include_str!("../../../book/src/boolean.md")]
mod boolean {}
#[doc = include_str!("../../../book/src/graphs.md")]
mod graphs {}
#[doc = include_str!("../../../book/src/fsm.md")]
mod fsm {}
#[doc = include_str!("../../../book/src/harpoon.md")]
mod harpoon {}
#[doc = include_str!("../../../book/src/watermarks.md")]
mod watermarks {}
#[doc = include_str!("../../../book/src/command-line.md")]
mod command_line {}
#[doc = include_str!("../../../book/src/http-api.md")]
mod http_api {}
