// Headless driver and renter flows: every figure shown in the UI comes from
// a receipt or a gateway view response, never from client-side fee math.
// Transactions are signed locally and relayed; nonces track the on-chain
// account with a local floor so several writes can queue in one block.

import { GatewayClient, MessageJson, ReceiptJson, SlotSpace, Space } from "./api.js";
import { hexToBytes } from "./codec.js";
import { Wallet } from "./crypto.js";
import {
  bookSpaceArgs,
  hoursCeil,
  registerSlotSpaceArgs,
  sendMessageArgs,
  signTransaction,
  TxRequest,
  u64Args,
} from "./tx.js";

export interface HistoryEntry {
  hash: string;
  contract: string;
  func: string;
  status?: string;
  revertReason?: string;
  gasUsed?: number;
  blockHeight?: number;
  txIndex?: number;
  returnValue?: string;
}

export interface SessionView {
  active: boolean;
  spaceId?: number;
  startTime?: number;
  elapsed?: number;
  amountDue?: number;
  ratePerSecond?: number;
  headTime?: number;
}

export interface InboxMessage {
  id: number;
  senderHex: string;
  timestamp: number;
  text: string; // unsealed when possible, otherwise a hex placeholder
  sealed: boolean;
}

function u64FromHex(hex: string): number {
  if (!hex) return 0;
  const bytes = hexToBytes(hex);
  let value = 0n;
  for (let i = Math.min(bytes.length, 8) - 1; i >= 0; i--) {
    value = (value << 8n) | BigInt(bytes[i]);
  }
  return Number(value);
}

export class AccountSession {
  readonly history: HistoryEntry[] = [];
  private nextNonce = 0;

  constructor(readonly api: GatewayClient, readonly wallet: Wallet) {}

  get addressHex(): string {
    return this.wallet.addressHex;
  }

  async balance(): Promise<number> {
    return (await this.api.account(this.addressHex)).balance;
  }

  /** Sign and relay one call; the entry lands in history immediately. */
  async submit(request: TxRequest): Promise<HistoryEntry> {
    const account = await this.api.account(this.addressHex);
    const nonce = Math.max(account.nonce, this.nextNonce);
    const signed = await signTransaction(this.wallet, nonce, request);
    await this.api.submitTx(signed.encodedHex);
    this.nextNonce = nonce + 1;
    const entry: HistoryEntry = {
      hash: signed.hash,
      contract: signed.contract,
      func: signed.func,
    };
    this.history.push(entry);
    return entry;
  }

  /** Submit and block until the receipt arrives; returns the filled entry. */
  async submitAndWait(request: TxRequest, timeoutMs = 20_000): Promise<HistoryEntry> {
    const entry = await this.submit(request);
    const receipt = await this.api.waitReceipt(entry.hash, timeoutMs);
    this.applyReceipt(entry, receipt);
    return entry;
  }

  private applyReceipt(entry: HistoryEntry, receipt: ReceiptJson): void {
    entry.status = receipt.status;
    entry.revertReason = receipt.revert_reason;
    entry.gasUsed = receipt.gas_used;
    entry.blockHeight = receipt.block_height;
    entry.txIndex = receipt.tx_index;
    entry.returnValue = receipt.return_value;
  }

  /** Pull receipts for anything pending; history sorts into block order. */
  async refreshHistory(): Promise<HistoryEntry[]> {
    for (const entry of this.history) {
      if (entry.status !== undefined) continue;
      const receipt = await this.api.receipt(entry.hash);
      if (receipt !== null) this.applyReceipt(entry, receipt);
    }
    this.history.sort(
      (a, b) =>
        (a.blockHeight ?? Number.MAX_SAFE_INTEGER) - (b.blockHeight ?? Number.MAX_SAFE_INTEGER)
        || (a.txIndex ?? 0) - (b.txIndex ?? 0),
    );
    return this.history;
  }
}

export class DriverFlow extends AccountSession {
  async listSpaces(availableFrom?: number, until?: number): Promise<Space[]> {
    return (await this.api.spaces(availableFrom, until)).spaces;
  }

  /** Book an hourly slot space; payment is ceil(hours) x rate, from the listing. */
  async bookSlot(space: SlotSpace, from: number, until: number): Promise<HistoryEntry> {
    const value = space.rate_per_hour * hoursCeil(from, until);
    return this.submitAndWait({
      contract: "ParkingSpaceManagement",
      func: "bookParkingSpace",
      args: bookSpaceArgs(space.id, from, until),
      value,
    });
  }

  async releaseSlot(spaceId: number): Promise<HistoryEntry> {
    return this.submitAndWait({
      contract: "ParkingSpaceManagement",
      func: "releaseParkingSpace",
      args: u64Args(spaceId),
    });
  }

  async startMetered(spaceId: number): Promise<HistoryEntry> {
    return this.submitAndWait({
      contract: "AutomatedParkingPayments",
      func: "startParking",
      args: u64Args(spaceId),
    });
  }

  /** Live session panel data; amountDue comes from the gateway's view. */
  async session(): Promise<SessionView> {
    const body = await this.api.session(this.addressHex);
    if (!body.active) return { active: false };
    return {
      active: true,
      spaceId: body.space_id,
      startTime: body.start_time,
      elapsed: body.elapsed,
      amountDue: body.amount_due,
      ratePerSecond: body.rate_per_second,
      headTime: body.head_time,
    };
  }

  /** End the session; the displayed fee is the receipt's return value. */
  async endSession(): Promise<{ entry: HistoryEntry; fee: number }> {
    const entry = await this.submitAndWait({
      contract: "AutomatedParkingPayments",
      func: "endParking",
    });
    return { entry, fee: u64FromHex(entry.returnValue ?? "") };
  }

  async unreadMessages(): Promise<InboxMessage[]> {
    const messages = await this.api.unread(this.addressHex);
    const inbox: InboxMessage[] = [];
    for (const message of messages) {
      inbox.push(await this.decodeMessage(message));
    }
    return inbox;
  }

  private async decodeMessage(message: MessageJson): Promise<InboxMessage> {
    const raw = hexToBytes(message.content);
    try {
      const plain = await this.wallet.unseal(raw);
      return {
        id: message.id,
        senderHex: message.sender,
        timestamp: message.timestamp,
        text: new TextDecoder().decode(plain),
        sealed: true,
      };
    } catch {
      return {
        id: message.id,
        senderHex: message.sender,
        timestamp: message.timestamp,
        text: new TextDecoder().decode(raw),
        sealed: false,
      };
    }
  }

  async markAllRead(): Promise<number> {
    const entry = await this.submitAndWait({
      contract: "VehicularCommunication",
      func: "markAllAsRead",
    });
    return u64FromHex(entry.returnValue ?? "");
  }
}

export class RenterFlow extends AccountSession {
  async registerSlotSpace(
    location: string,
    ratePerHour: number,
    slots: Array<[number, number]>,
  ): Promise<{ entry: HistoryEntry; spaceId: number }> {
    const entry = await this.submitAndWait({
      contract: "ParkingSpaceManagement",
      func: "registerParkingSpace",
      args: registerSlotSpaceArgs(location, ratePerHour, slots),
    });
    return { entry, spaceId: u64FromHex(entry.returnValue ?? "") };
  }

  async registerMeteredSpace(ratePerSecond: number): Promise<{ entry: HistoryEntry; spaceId: number }> {
    const entry = await this.submitAndWait({
      contract: "AutomatedParkingPayments",
      func: "registerParkingSpace",
      args: u64Args(ratePerSecond),
    });
    return { entry, spaceId: u64FromHex(entry.returnValue ?? "") };
  }

  async mySpaces(): Promise<Space[]> {
    const all = (await this.api.spaces()).spaces;
    return all.filter((s) => s.owner === this.addressHex);
  }

  /** Settled revenue of a metered space inside a window (receipt-backed). */
  async meteredRevenue(spaceId: number, windowStart: number, windowEnd: number): Promise<number> {
    return (await this.api.occupancy(spaceId, windowStart, windowEnd)).revenue;
  }

  /** Withdraw slot-space earnings; amount comes from the receipt. */
  async withdrawSlotEarnings(spaceId: number): Promise<{ entry: HistoryEntry; amount: number }> {
    const entry = await this.submitAndWait({
      contract: "ParkingSpaceManagement",
      func: "withdraw",
      args: u64Args(spaceId),
    });
    return { entry, amount: u64FromHex(entry.returnValue ?? "") };
  }

  /** Driver-to-driver messaging helper, used by tests and the message panel. */
  async sendRawMessage(recipient: Uint8Array, content: Uint8Array): Promise<HistoryEntry> {
    return this.submitAndWait({
      contract: "VehicularCommunication",
      func: "sendMessage",
      args: sendMessageArgs(recipient, content),
    });
  }
}
