// Client-side keys over WebCrypto: Ed25519 signing, X25519 + HKDF + AES-GCM
// for unsealing direct messages. Byte-compatible with the chain's account
// scheme; key files are the ones `esp2cs keygen` writes. Secrets never leave
// this module.

import { bytesToHex, concat, hexToBytes } from "./codec.js";

const subtle = globalThis.crypto.subtle;

const ED25519_PKCS8_PREFIX = hexToBytes("302e020100300506032b657004220420");
const X25519_PKCS8_PREFIX = hexToBytes("302e020100300506032b656e04220420");
const ENC_KEY_INFO = new TextEncoder().encode("esp2cs-enc-key-v1");
const SEAL_INFO = new TextEncoder().encode("esp2cs-seal-v1");
const GCM_NONCE = new Uint8Array(12);

export async function sha256(data: Uint8Array): Promise<Uint8Array> {
  return new Uint8Array(await subtle.digest("SHA-256", data as BufferSource));
}

function base64urlToBytes(b64: string): Uint8Array {
  const std = b64.replace(/-/g, "+").replace(/_/g, "/");
  const padded = std + "=".repeat((4 - (std.length % 4)) % 4);
  const raw = atob(padded);
  return Uint8Array.from(raw, (c) => c.charCodeAt(0));
}

async function hkdf(key: Uint8Array, info: Uint8Array, length: number): Promise<Uint8Array> {
  const material = await subtle.importKey("raw", key as BufferSource, "HKDF", false, ["deriveBits"]);
  const bits = await subtle.deriveBits(
    { name: "HKDF", hash: "SHA-256", salt: new Uint8Array(0), info: info as BufferSource },
    material,
    length * 8,
  );
  return new Uint8Array(bits);
}

export interface KeyFile {
  seed: string;
  sign_public?: string;
  enc_public?: string;
  address?: string;
}

export class Wallet {
  private constructor(
    private signKey: CryptoKey,
    private encKey: CryptoKey,
    readonly signPublic: Uint8Array,
    readonly encPublic: Uint8Array,
    readonly address: Uint8Array,
  ) {}

  static async fromSeed(seed: Uint8Array): Promise<Wallet> {
    if (seed.length !== 32) throw new Error("seed must be 32 bytes");
    const signKey = await subtle.importKey(
      "pkcs8", concat(ED25519_PKCS8_PREFIX, seed) as BufferSource,
      { name: "Ed25519" }, true, ["sign"],
    );
    const signJwk = await subtle.exportKey("jwk", signKey);
    const signPublic = base64urlToBytes(signJwk.x!);

    const encSeed = await hkdf(seed, ENC_KEY_INFO, 32);
    const encKey = await subtle.importKey(
      "pkcs8", concat(X25519_PKCS8_PREFIX, encSeed) as BufferSource,
      { name: "X25519" }, true, ["deriveBits"],
    );
    const encJwk = await subtle.exportKey("jwk", encKey);
    const encPublic = base64urlToBytes(encJwk.x!);

    const address = (await sha256(signPublic)).slice(12);
    return new Wallet(signKey, encKey, signPublic, encPublic, address);
  }

  static async fromKeyFile(file: KeyFile): Promise<Wallet> {
    const wallet = await Wallet.fromSeed(hexToBytes(file.seed));
    for (const [field, expected] of [
      ["sign_public", file.sign_public],
      ["enc_public", file.enc_public],
      ["address", file.address],
    ] as const) {
      if (expected === undefined) continue;
      const actual =
        field === "sign_public" ? wallet.signPublic
        : field === "enc_public" ? wallet.encPublic
        : wallet.address;
      if (bytesToHex(actual) !== expected.toLowerCase()) {
        throw new Error(`key file ${field} does not match its seed`);
      }
    }
    return wallet;
  }

  get addressHex(): string {
    return bytesToHex(this.address);
  }

  async sign(message: Uint8Array): Promise<Uint8Array> {
    const sig = await subtle.sign({ name: "Ed25519" }, this.signKey, message as BufferSource);
    return new Uint8Array(sig);
  }

  /** Seal a payload to another account's encryption key. */
  static async seal(recipientEncPublic: Uint8Array, plaintext: Uint8Array): Promise<Uint8Array> {
    const eph = (await subtle.generateKey({ name: "X25519" }, true, ["deriveBits"])) as CryptoKeyPair;
    const ephJwk = await subtle.exportKey("jwk", eph.publicKey);
    const ephPublic = base64urlToBytes(ephJwk.x!);
    const recipientKey = await subtle.importKey(
      "raw", recipientEncPublic as BufferSource, { name: "X25519" }, false, [],
    );
    const shared = new Uint8Array(
      await subtle.deriveBits({ name: "X25519", public: recipientKey }, eph.privateKey, 256),
    );
    const key = await hkdf(shared, concat(SEAL_INFO, ephPublic, recipientEncPublic), 32);
    const aes = await subtle.importKey("raw", key as BufferSource, { name: "AES-GCM" }, false, ["encrypt"]);
    const sealed = await subtle.encrypt(
      { name: "AES-GCM", iv: GCM_NONCE }, aes, plaintext as BufferSource,
    );
    return concat(ephPublic, new Uint8Array(sealed));
  }

  /** Open a blob sealed to this account's encryption key. */
  async unseal(blob: Uint8Array): Promise<Uint8Array> {
    if (blob.length < 48) throw new Error("sealed blob too short");
    const ephPublic = blob.slice(0, 32);
    const ephKey = await subtle.importKey("raw", ephPublic as BufferSource, { name: "X25519" }, false, []);
    const shared = new Uint8Array(
      await subtle.deriveBits({ name: "X25519", public: ephKey }, this.encKey, 256),
    );
    const key = await hkdf(shared, concat(SEAL_INFO, ephPublic, this.encPublic), 32);
    const aes = await subtle.importKey("raw", key as BufferSource, { name: "AES-GCM" }, false, ["decrypt"]);
    try {
      const plain = await subtle.decrypt(
        { name: "AES-GCM", iv: GCM_NONCE }, aes, blob.slice(32) as BufferSource,
      );
      return new Uint8Array(plain);
    } catch {
      throw new Error("blob not sealed to this key");
    }
  }
}
