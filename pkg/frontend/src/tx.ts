// Transaction construction and signing, byte-compatible with the chain codec.

import { bytesToHex, concat, encodeBytes, encodePairs, encodeStr, encodeU64 } from "./codec.js";
import { sha256, Wallet } from "./crypto.js";

export const CONTRACT = {
  VehicularCommunication: 0,
  PaymentManagement: 1,
  ParkingSpaceManagement: 2,
  AutomatedParkingPayments: 3,
} as const;

export type ContractName = keyof typeof CONTRACT;

export interface TxRequest {
  contract: ContractName;
  func: string;
  args?: Uint8Array;
  value?: number | bigint;
  gasPriceGwei?: number;
}

export interface SignedTx {
  encodedHex: string;
  hash: string;
  func: string;
  contract: ContractName;
}

export async function signTransaction(
  wallet: Wallet,
  nonce: number,
  request: TxRequest,
): Promise<SignedTx> {
  const payload = concat(
    wallet.signPublic,
    encodeU64(nonce),
    encodeU64(CONTRACT[request.contract]),
    encodeStr(request.func),
    encodeBytes(request.args ?? new Uint8Array(0)),
    encodeU64(request.value ?? 0),
    encodeU64(request.gasPriceGwei ?? 1),
  );
  const signature = await wallet.sign(payload);
  const encoded = concat(payload, signature);
  return {
    encodedHex: bytesToHex(encoded),
    hash: bytesToHex(await sha256(encoded)),
    func: request.func,
    contract: request.contract,
  };
}

// argument encoders for the functions the console uses

export function bookSpaceArgs(spaceId: number, from: number, until: number): Uint8Array {
  return concat(encodeU64(spaceId), encodeU64(from), encodeU64(until));
}

export function registerSlotSpaceArgs(
  location: string,
  ratePerHour: number,
  slots: Array<[number, number]>,
): Uint8Array {
  return concat(encodeStr(location), encodeU64(ratePerHour), encodePairs(slots));
}

export function u64Args(...values: number[]): Uint8Array {
  return concat(...values.map((v) => encodeU64(v)));
}

export function sendMessageArgs(recipient: Uint8Array, content: Uint8Array): Uint8Array {
  return concat(recipient, encodeBytes(content));
}

export function hoursCeil(from: number, until: number): number {
  return Math.ceil((until - from) / 3600);
}
