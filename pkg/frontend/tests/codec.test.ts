// Wire-format parity against golden vectors generated by the chain codec.

import { describe, expect, it } from "vitest";
import golden from "./golden.json";
import {
  bytesToHex,
  encodeBytes,
  encodePairs,
  encodeStr,
  encodeU64,
  hexToBytes,
  Reader,
} from "../src/codec.js";

describe("canonical encoding", () => {
  it("encodes u64 little-endian", () => {
    expect(bytesToHex(encodeU64(0))).toBe("0000000000000000");
    expect(bytesToHex(encodeU64(258))).toBe(golden.u64_258);
  });

  it("rejects out-of-range u64", () => {
    expect(() => encodeU64(-1)).toThrow();
    expect(() => encodeU64(2n ** 64n)).toThrow();
  });

  it("length-prefixes byte strings", () => {
    expect(bytesToHex(encodeBytes(new Uint8Array(0)))).toBe("0000000000000000");
    expect(bytesToHex(encodeBytes(new TextEncoder().encode("abc")))).toBe(golden.bytes_abc);
  });

  it("encodes strings as utf-8 bytes", () => {
    expect(bytesToHex(encodeStr("lot-a"))).toBe(golden.str_lot);
  });

  it("encodes pair lists with a count prefix", () => {
    expect(bytesToHex(encodePairs([[1, 2], [3, 4]]))).toBe(golden.pairs);
  });

  it("round-trips through the reader", () => {
    const reader = new Reader(encodeBytes(new TextEncoder().encode("xyz")));
    expect(new TextDecoder().decode(reader.bytes())).toBe("xyz");
    reader.expectEnd();
  });

  it("hex helpers round-trip", () => {
    const bytes = hexToBytes(golden.tx_hash);
    expect(bytesToHex(bytes)).toBe(golden.tx_hash);
    expect(() => hexToBytes("0g")).toThrow();
  });
});
