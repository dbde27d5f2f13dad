// SPDX-License-Identifier: Apache-2.0

//! Single-flit network packets.

/// Virtual networks. Reads and write-backs share the request network,
/// controller replies travel on their own, HACCs on a third.
pub const VN_REQ: usize = 0;
pub const VN_RESP: usize = 1;
pub const VN_HACC: usize = 2;
pub const N_VNS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    Core(u32),
    Mem(u32),
    Mc(u32),
}

/// Identifies the register waiting on a read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadTicket {
    pub core: u32,
    pub pipe: u16,
    /// Acceptance sequence number of the MMH4 within its core.
    pub seq: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload<T> {
    Read { ticket: ReadTicket, granule: u64 },
    ReadResp { ticket: ReadTicket },
    Hacc { tag: u32, data: T, counter: u32, core: u32, emitted: u64 },
    WriteBack { row: u32, col: u32, value: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet<T> {
    pub dst: Endpoint,
    pub dst_router: u32,
    /// First cycle the packet may leave the buffer it sits in.
    pub ready_at: u64,
    pub hops: u32,
    pub payload: Payload<T>,
}

impl<T> Packet<T> {
    pub fn vn(&self) -> usize {
        match self.payload {
            Payload::Read { .. } | Payload::WriteBack { .. } => VN_REQ,
            Payload::ReadResp { .. } => VN_RESP,
            Payload::Hacc { .. } => VN_HACC,
        }
    }
}
