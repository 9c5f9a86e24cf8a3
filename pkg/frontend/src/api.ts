// Typed client for the gateway's /v1 JSON API.

export interface HeaderJson {
  height: number;
  parent_hash: string;
  timestamp: number;
  proposer: string;
  tx_root: string;
  state_root: string;
  signature: string;
  block_hash: string;
}

export interface ReceiptJson {
  tx_hash: string;
  status: "success" | "reverted";
  revert_reason: string;
  gas_used: number;
  return_value: string;
  logs: Array<{ name: string; topics: string[]; data: string }>;
  block_height: number;
  tx_index: number;
}

export interface SlotSpace {
  kind: "slot";
  id: number;
  owner: string;
  rate_per_hour: number;
  location: string;
  slots: Array<[number, number]>;
  booked_by: string | null;
  booked_until: number;
  earnings: number;
  available?: boolean;
}

export interface MeteredSpace {
  kind: "metered";
  id: number;
  owner: string;
  rate_per_second: number;
  occupant: string | null;
  sessions: number;
  revenue: number;
}

export type Space = SlotSpace | MeteredSpace;

export interface SessionJson {
  active: boolean;
  space_id?: number;
  start_time?: number;
  head_time?: number;
  elapsed?: number;
  rate_per_second?: number;
  amount_due?: number;
}

export interface MessageJson {
  id: number;
  sender: string;
  recipient: string | null;
  content: string;
  timestamp: number;
  read: boolean;
}

export interface OccupancyJson {
  space_id: number;
  window_start: number;
  window_end: number;
  occupied_seconds: number;
  sessions_count: number;
  revenue: number;
}

export interface AccountJson {
  address: string;
  balance: number;
  nonce: number;
}

export interface StatusJson {
  head_height: number;
  head_hash: string;
  state_root: string;
  mempool_size: number;
  last_block_time: number;
  authorities: Array<{ public_key: string; address: string; live: boolean | null }>;
}

export class GatewayError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class GatewayClient {
  constructor(
    readonly baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!resp.ok) {
      const detail = await resp.json().then((b) => b.detail ?? resp.statusText, () => resp.statusText);
      throw new GatewayError(resp.status, String(detail));
    }
    return (await resp.json()) as T;
  }

  async status(): Promise<StatusJson> {
    return this.get("/v1/admin/status");
  }

  async headers(fromHeight = 0): Promise<HeaderJson[]> {
    const body = await this.get<{ headers: HeaderJson[] }>(
      `/v1/chain/headers?from=${fromHeight}`,
    );
    return body.headers;
  }

  async account(address: string): Promise<AccountJson> {
    return this.get(`/v1/accounts/${address}`);
  }

  async submitTx(encodedHex: string): Promise<string> {
    const resp = await this.fetchFn(`${this.baseUrl}/v1/transactions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ tx: encodedHex }),
    });
    if (!resp.ok) {
      const detail = await resp.json().then((b) => b.detail ?? resp.statusText, () => resp.statusText);
      throw new GatewayError(resp.status, String(detail));
    }
    const body = (await resp.json()) as { tx_hash: string };
    return body.tx_hash;
  }

  async receipt(txHash: string): Promise<ReceiptJson | null> {
    try {
      return await this.get<ReceiptJson>(`/v1/receipts/${txHash}`);
    } catch (err) {
      if (err instanceof GatewayError && err.status === 404) return null;
      throw err;
    }
  }

  /** Poll until the transaction is included or the timeout passes. */
  async waitReceipt(
    txHash: string,
    timeoutMs = 20_000,
    pollMs = 250,
    sleep: (ms: number) => Promise<void> = (ms) => new Promise((r) => setTimeout(r, ms)),
  ): Promise<ReceiptJson> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const receipt = await this.receipt(txHash);
      if (receipt !== null) return receipt;
      if (Date.now() > deadline) throw new GatewayError(408, `no receipt for ${txHash}`);
      await sleep(pollMs);
    }
  }

  async proof(txHash: string): Promise<{
    header_height: number;
    leaf_index: number;
    leaf_count: number;
    siblings: string[];
  }> {
    return this.get(`/v1/proofs/${txHash}`);
  }

  async unread(account: string): Promise<MessageJson[]> {
    const body = await this.get<{ messages: MessageJson[] }>(
      `/v1/messages/unread?account=${account}`,
    );
    return body.messages;
  }

  async spaces(availableFrom?: number, until?: number): Promise<{ spaces: Space[]; head_time: number }> {
    const query =
      availableFrom !== undefined && until !== undefined
        ? `?available_from=${availableFrom}&until=${until}`
        : "";
    return this.get(`/v1/parking/spaces${query}`);
  }

  async session(vehicle: string): Promise<SessionJson> {
    return this.get(`/v1/parking/sessions?vehicle=${vehicle}`);
  }

  async occupancy(spaceId: number, windowStart: number, windowEnd: number): Promise<OccupancyJson> {
    return this.get(
      `/v1/analytics/occupancy?space_id=${spaceId}&from=${windowStart}&to=${windowEnd}`,
    );
  }
}
