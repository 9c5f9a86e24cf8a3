// DOM layer: hash routing between the driver and renter consoles, 2 s polling
// for the live session panel, inline error surfacing. All state lives in the
// flow objects; this module only renders and wires events.

import { GatewayClient, GatewayError, SlotSpace, Space } from "./api.js";
import { Wallet } from "./crypto.js";
import { DriverFlow, HistoryEntry, InboxMessage, RenterFlow } from "./flows.js";

const POLL_MS = 2000;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function fmtWei(value: number): string {
  return `${value.toLocaleString("en-US")} wei`;
}

function fmtSpace(space: Space): string {
  if (space.kind === "slot") {
    const windows = space.slots.map(([a, b]) => `${a}-${b}`).join(", ");
    const state = space.booked_by ? `booked until ${space.booked_until}` : "free";
    const avail = space.available === undefined ? "" : space.available ? " [available]" : " [unavailable]";
    return `#${space.id} slot "${space.location}" @ ${space.rate_per_hour}/h, windows ${windows}, ${state}${avail}`;
  }
  const state = space.occupant ? `occupied by ${space.occupant.slice(0, 8)}` : "free";
  return `#${space.id} metered @ ${space.rate_per_second}/s, ${state}, ${space.sessions} sessions, revenue ${space.revenue}`;
}

function renderHistory(entries: HistoryEntry[]): string {
  if (!entries.length) return "<li>no transactions yet</li>";
  return entries
    .map((e) => {
      const where = e.blockHeight === undefined ? "pending" : `block ${e.blockHeight}`;
      const status = e.status ?? "…";
      const extra = e.revertReason ? ` (${e.revertReason})` : "";
      return `<li><code>${e.hash.slice(0, 12)}</code> ${e.contract}.${e.func} — ${status}${extra}, ${where}, gas ${e.gasUsed ?? "?"}</li>`;
    })
    .join("");
}

function renderInbox(messages: InboxMessage[]): string {
  if (!messages.length) return "<li>inbox empty</li>";
  return messages
    .map(
      (m) =>
        `<li>#${m.id} from <code>${m.senderHex.slice(0, 10)}</code> at t=${m.timestamp}: ` +
        `${m.sealed ? "🔒 " : ""}${m.text}</li>`,
    )
    .join("");
}

class ConsoleApp {
  private api: GatewayClient | null = null;
  private driver: DriverFlow | null = null;
  private renter: RenterFlow | null = null;
  private pollTimer: number | undefined;

  async connect(): Promise<void> {
    const gateway = el<HTMLInputElement>("gateway-url").value.trim();
    const keyText = el<HTMLTextAreaElement>("key-json").value.trim();
    try {
      const wallet = await Wallet.fromKeyFile(JSON.parse(keyText));
      this.api = new GatewayClient(gateway);
      const status = await this.api.status();
      this.driver = new DriverFlow(this.api, wallet);
      this.renter = new RenterFlow(this.api, wallet);
      el("account-line").textContent =
        `account ${wallet.addressHex} — head ${status.head_height}, balance ${fmtWei(await this.driver.balance())}`;
      el("login").classList.add("hidden");
      el("nav").classList.remove("hidden");
      this.route();
    } catch (err) {
      this.fail("login-error", err);
    }
  }

  route(): void {
    const hash = location.hash || "#/driver";
    el("driver-view").classList.toggle("hidden", hash !== "#/driver");
    el("renter-view").classList.toggle("hidden", hash !== "#/renter");
    if (hash === "#/driver") void this.refreshDriver();
    else void this.refreshRenter();
  }

  private fail(target: string, err: unknown): void {
    const message =
      err instanceof GatewayError ? `gateway: ${err.message}` : err instanceof Error ? err.message : String(err);
    el(target).textContent = message;
  }

  // -- driver ---------------------------------------------------------------

  async refreshDriver(): Promise<void> {
    if (!this.driver) return;
    el("driver-error").textContent = "";
    try {
      const spaces = await this.driver.listSpaces();
      el("spaces-list").innerHTML = spaces.length
        ? spaces.map((s) => `<li>${fmtSpace(s)}</li>`).join("")
        : "<li>no spaces registered</li>";
      el("history-list").innerHTML = renderHistory(await this.driver.refreshHistory());
      el("inbox-list").innerHTML = renderInbox(await this.driver.unreadMessages());
      await this.pollSession();
      window.clearInterval(this.pollTimer);
      this.pollTimer = window.setInterval(() => void this.pollSession(), POLL_MS);
    } catch (err) {
      this.fail("driver-error", err);
    }
  }

  async pollSession(): Promise<void> {
    if (!this.driver) return;
    try {
      const view = await this.driver.session();
      el("session-panel").innerHTML = view.active
        ? `space #${view.spaceId}, started t=${view.startTime}, elapsed ${view.elapsed}s, ` +
          `<strong>due ${fmtWei(view.amountDue ?? 0)}</strong> @ ${view.ratePerSecond}/s`
        : "no active session";
    } catch (err) {
      this.fail("driver-error", err);
    }
  }

  async bookSlot(): Promise<void> {
    if (!this.driver) return;
    try {
      const id = Number(el<HTMLInputElement>("book-space-id").value);
      const from = Number(el<HTMLInputElement>("book-from").value);
      const until = Number(el<HTMLInputElement>("book-until").value);
      const spaces = await this.driver.listSpaces(from, until);
      const space = spaces.find((s): s is SlotSpace => s.kind === "slot" && s.id === id);
      if (!space) throw new Error(`slot space #${id} not found`);
      const entry = await this.driver.bookSlot(space, from, until);
      el("driver-error").textContent =
        entry.status === "success" ? `booked #${id}` : `booking reverted: ${entry.revertReason}`;
      await this.refreshDriver();
    } catch (err) {
      this.fail("driver-error", err);
    }
  }

  async startMetered(): Promise<void> {
    if (!this.driver) return;
    try {
      const id = Number(el<HTMLInputElement>("start-space-id").value);
      const entry = await this.driver.startMetered(id);
      el("driver-error").textContent =
        entry.status === "success" ? `session started on #${id}` : `start reverted: ${entry.revertReason}`;
      await this.refreshDriver();
    } catch (err) {
      this.fail("driver-error", err);
    }
  }

  async endSession(): Promise<void> {
    if (!this.driver) return;
    try {
      const { entry, fee } = await this.driver.endSession();
      el("driver-error").textContent =
        entry.status === "success" ? `session ended, fee ${fmtWei(fee)}` : `end reverted: ${entry.revertReason}`;
      await this.refreshDriver();
    } catch (err) {
      this.fail("driver-error", err);
    }
  }

  async markAllRead(): Promise<void> {
    if (!this.driver) return;
    try {
      const marked = await this.driver.markAllRead();
      el("driver-error").textContent = `marked ${marked} message(s) read`;
      await this.refreshDriver();
    } catch (err) {
      this.fail("driver-error", err);
    }
  }

  // -- renter ----------------------------------------------------------------

  async refreshRenter(): Promise<void> {
    if (!this.renter) return;
    el("renter-error").textContent = "";
    try {
      const mine = await this.renter.mySpaces();
      const lines: string[] = [];
      for (const space of mine) {
        if (space.kind === "metered") {
          const revenue = await this.renter.meteredRevenue(space.id, 0, 2 ** 40);
          lines.push(`<li>${fmtSpace(space)} — settled revenue ${fmtWei(revenue)}</li>`);
        } else {
          lines.push(`<li>${fmtSpace(space)} — withdrawable ${fmtWei(space.earnings)}</li>`);
        }
      }
      el("my-spaces").innerHTML = lines.length ? lines.join("") : "<li>no spaces of yours yet</li>";
      el("renter-history").innerHTML = renderHistory(await this.renter.refreshHistory());
      el("renter-balance").textContent = `balance ${fmtWei(await this.renter.balance())}`;
    } catch (err) {
      this.fail("renter-error", err);
    }
  }

  async registerSlot(): Promise<void> {
    if (!this.renter) return;
    try {
      const location = el<HTMLInputElement>("reg-location").value;
      const rate = Number(el<HTMLInputElement>("reg-rate").value);
      const windows = el<HTMLInputElement>("reg-slots").value
        .split(",")
        .map((pair) => pair.split("-").map(Number) as [number, number]);
      const { entry, spaceId } = await this.renter.registerSlotSpace(location, rate, windows);
      el("renter-error").textContent =
        entry.status === "success" ? `registered slot space #${spaceId}` : `reverted: ${entry.revertReason}`;
      await this.refreshRenter();
    } catch (err) {
      this.fail("renter-error", err);
    }
  }

  async registerMetered(): Promise<void> {
    if (!this.renter) return;
    try {
      const rate = Number(el<HTMLInputElement>("reg-metered-rate").value);
      const { entry, spaceId } = await this.renter.registerMeteredSpace(rate);
      el("renter-error").textContent =
        entry.status === "success" ? `registered metered space #${spaceId}` : `reverted: ${entry.revertReason}`;
      await this.refreshRenter();
    } catch (err) {
      this.fail("renter-error", err);
    }
  }

  async withdraw(): Promise<void> {
    if (!this.renter) return;
    try {
      const id = Number(el<HTMLInputElement>("withdraw-space-id").value);
      const { entry, amount } = await this.renter.withdrawSlotEarnings(id);
      el("renter-error").textContent =
        entry.status === "success" ? `withdrew ${fmtWei(amount)}` : `reverted: ${entry.revertReason}`;
      await this.refreshRenter();
    } catch (err) {
      this.fail("renter-error", err);
    }
  }
}

export function boot(): void {
  const app = new ConsoleApp();
  el("connect").addEventListener("click", () => void app.connect());
  window.addEventListener("hashchange", () => app.route());
  el("book").addEventListener("click", () => void app.bookSlot());
  el("start").addEventListener("click", () => void app.startMetered());
  el("end").addEventListener("click", () => void app.endSession());
  el("mark-read").addEventListener("click", () => void app.markAllRead());
  el("register-slot").addEventListener("click", () => void app.registerSlot());
  el("register-metered").addEventListener("click", () => void app.registerMetered());
  el("withdraw").addEventListener("click", () => void app.withdraw());
}
