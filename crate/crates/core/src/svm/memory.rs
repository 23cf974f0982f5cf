// SPDX-License-Identifier: Apache-2.0

//! Sparse paged memory with per-region permissions.
//!
//! Permissions live on regions (a handful per machine); page contents are
//! materialised on first write, so an untouched stack costs nothing.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::pbf::{Perms, PAGE_SIZE};

const PAGE: u64 = PAGE_SIZE as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Code,
    Data,
    Stack,
    Secret,
    Heap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub start: u32,
    /// Exclusive; u64 so a region may end at 2^32.
    pub end: u64,
    pub perms: Perms,
    pub kind: RegionKind,
}

impl Region {
    fn contains(&self, addr: u32) -> bool {
        addr >= self.start && u64::from(addr) < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    Read,
    Write,
    Exec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccessError {
    pub addr: u32,
    pub access: Access,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Memory {
    regions: Vec<Region>,
    pages: BTreeMap<u32, Box<[u8; PAGE_SIZE as usize]>>,
}

fn page_of(addr: u32) -> u32 {
    addr / PAGE_SIZE
}

impl Memory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    /// Maps `[start, start + len)` rounded out to pages. Returns false if it
    /// would overlap an existing region.
    pub fn map(&mut self, start: u32, len: u64, perms: Perms, kind: RegionKind) -> bool {
        debug_assert!(!(perms.writable() && perms.executable()));
        let start = start & !(PAGE_SIZE - 1);
        let end = (u64::from(start) + len).div_ceil(PAGE) * PAGE;
        if end > 1 << 32 || self.overlaps(start, end) {
            return false;
        }
        self.regions.push(Region { start, end, perms, kind });
        true
    }

    pub fn overlaps(&self, start: u32, end: u64) -> bool {
        self.regions.iter().any(|r| u64::from(start) < r.end && end > u64::from(r.start))
    }

    pub fn region_at(&self, addr: u32) -> Option<&Region> {
        self.regions.iter().find(|r| r.contains(addr))
    }

    pub fn perms_at(&self, addr: u32) -> Perms {
        self.region_at(addr).map_or(Perms::NONE, |r| r.perms)
    }

    /// Checks that every byte of `[addr, addr + len)` allows `access`.
    pub fn check_range(&self, addr: u32, len: u32, access: Access) -> Result<(), AccessError> {
        if len == 0 {
            return Ok(());
        }
        let end = u64::from(addr) + u64::from(len);
        if end > 1 << 32 {
            return Err(AccessError { addr: u32::MAX, access });
        }
        let mut cursor = u64::from(addr);
        while cursor < end {
            let a = cursor as u32;
            let region = self
                .region_at(a)
                .filter(|r| allows(r.perms, access))
                .ok_or(AccessError { addr: a, access })?;
            cursor = region.end;
        }
        Ok(())
    }

    /// Visits `[addr, addr + len)` one page-contained piece at a time as
    /// `(address, offset into the range, piece length)`.
    fn pieces(addr: u32, len: usize, mut f: impl FnMut(u32, usize, usize)) {
        let mut done = 0;
        while done < len {
            let a = addr.wrapping_add(done as u32);
            let room = (PAGE_SIZE - a % PAGE_SIZE) as usize;
            let n = room.min(len - done);
            f(a, done, n);
            done += n;
        }
    }

    fn copy_out(&self, addr: u32, out: &mut [u8]) {
        let pages = &self.pages;
        Self::pieces(addr, out.len(), |a, at, n| {
            let dst = &mut out[at..at + n];
            match pages.get(&page_of(a)) {
                Some(p) => {
                    let off = (a % PAGE_SIZE) as usize;
                    dst.copy_from_slice(&p[off..off + n]);
                }
                None => dst.fill(0),
            }
        });
    }

    pub fn read(&self, addr: u32, out: &mut [u8]) -> Result<(), AccessError> {
        self.check_range(addr, out.len() as u32, Access::Read)?;
        self.copy_out(addr, out);
        Ok(())
    }

    pub fn write(&mut self, addr: u32, data: &[u8]) -> Result<(), AccessError> {
        self.check_range(addr, data.len() as u32, Access::Write)?;
        self.poke(addr, data);
        Ok(())
    }

    /// Writes without a permission check; used by the loader.
    pub(crate) fn poke(&mut self, addr: u32, data: &[u8]) {
        let pages = &mut self.pages;
        Self::pieces(addr, data.len(), |a, at, n| {
            let page = pages.entry(page_of(a)).or_insert_with(|| Box::new([0; PAGE_SIZE as usize]));
            let off = (a % PAGE_SIZE) as usize;
            page[off..off + n].copy_from_slice(&data[at..at + n]);
        });
    }

    pub fn read_u32(&self, addr: u32) -> Result<u32, AccessError> {
        let mut b = [0; 4];
        self.read(addr, &mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    pub fn write_u32(&mut self, addr: u32, value: u32) -> Result<(), AccessError> {
        self.write(addr, &value.to_le_bytes())
    }

    pub fn is_executable(&self, addr: u32) -> bool {
        addr % 8 == 0 && self.perms_at(addr).executable()
    }

    pub fn fetch(&self, addr: u32) -> Result<[u8; 8], AccessError> {
        if !self.is_executable(addr) {
            return Err(AccessError { addr, access: Access::Exec });
        }
        let mut raw = [0; 8];
        self.copy_out(addr, &mut raw);
        Ok(raw)
    }

    /// Unmaps `[addr, addr + len)` (rounded up to pages) if the whole range
    /// is heap memory.
    pub fn unmap_heap(&mut self, addr: u32, len: u32) -> bool {
        if addr % PAGE_SIZE != 0 || len == 0 {
            return false;
        }
        let start = u64::from(addr);
        let end = (start + u64::from(len)).div_ceil(PAGE) * PAGE;
        if end > 1 << 32 {
            return false;
        }
        let mut cursor = start;
        while cursor < end {
            match self.region_at(cursor as u32) {
                Some(r) if r.kind == RegionKind::Heap => cursor = r.end,
                _ => return false,
            }
        }
        let mut kept = Vec::with_capacity(self.regions.len() + 1);
        for r in self.regions.drain(..) {
            let (rs, re) = (u64::from(r.start), r.end);
            if r.kind != RegionKind::Heap || re <= start || rs >= end {
                kept.push(r);
                continue;
            }
            if rs < start {
                kept.push(Region { start: r.start, end: start, ..r.clone() });
            }
            if re > end {
                kept.push(Region { start: end as u32, end: re, ..r });
            }
        }
        self.regions = kept;
        let (first, last) = ((start / PAGE) as u32, (end / PAGE) as u32);
        self.pages.retain(|&p, _| p < first || p >= last);
        true
    }
}

fn allows(perms: Perms, access: Access) -> bool {
    match access {
        Access::Read => perms.readable(),
        Access::Write => perms.writable(),
        Access::Exec => perms.executable(),
    }
}
