// Canonical binary encoding, byte-compatible with the chain: unsigned 64-bit
// little-endian integers, u64 length prefixes on variable-size payloads,
// records as field concatenation in declaration order.

export function encodeU64(value: number | bigint): Uint8Array {
  const v = BigInt(value);
  if (v < 0n || v > 0xffffffffffffffffn) throw new Error(`u64 out of range: ${v}`);
  const out = new Uint8Array(8);
  new DataView(out.buffer).setBigUint64(0, v, true);
  return out;
}

export function encodeBytes(payload: Uint8Array): Uint8Array {
  return concat(encodeU64(payload.length), payload);
}

export function encodeStr(text: string): Uint8Array {
  return encodeBytes(new TextEncoder().encode(text));
}

export function encodePairs(pairs: Array<[number, number]>): Uint8Array {
  const parts: Uint8Array[] = [encodeU64(pairs.length)];
  for (const [a, b] of pairs) {
    parts.push(encodeU64(a), encodeU64(b));
  }
  return concat(...parts);
}

export function concat(...arrays: Uint8Array[]): Uint8Array {
  const total = arrays.reduce((n, a) => n + a.length, 0);
  const out = new Uint8Array(total);
  let offset = 0;
  for (const a of arrays) {
    out.set(a, offset);
    offset += a.length;
  }
  return out;
}

export function bytesToHex(data: Uint8Array): string {
  return Array.from(data, (b) => b.toString(16).padStart(2, "0")).join("");
}

export function hexToBytes(hex: string): Uint8Array {
  if (hex.length % 2 !== 0 || /[^0-9a-fA-F]/.test(hex)) {
    throw new Error(`invalid hex: ${hex.slice(0, 16)}...`);
  }
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(hex.slice(i * 2, i * 2 + 2), 16);
  }
  return out;
}

export class Reader {
  private pos = 0;

  constructor(private data: Uint8Array) {}

  private take(n: number): Uint8Array {
    if (this.pos + n > this.data.length) throw new Error("truncated encoding");
    const chunk = this.data.slice(this.pos, this.pos + n);
    this.pos += n;
    return chunk;
  }

  u64(): bigint {
    const chunk = this.take(8);
    return new DataView(chunk.buffer, chunk.byteOffset, 8).getBigUint64(0, true);
  }

  u64n(): number {
    return Number(this.u64());
  }

  fixed(n: number): Uint8Array {
    return this.take(n);
  }

  bytes(): Uint8Array {
    const length = this.u64n();
    return this.take(length);
  }

  get remaining(): number {
    return this.data.length - this.pos;
  }

  expectEnd(): void {
    if (this.pos !== this.data.length) throw new Error("trailing bytes");
  }
}
