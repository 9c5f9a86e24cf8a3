"""Transaction execution: admission, dispatch, gas, fees, receipts.

A transaction is excluded (never included in a block) on bad signature, bad
nonce, an unknown sender, or a balance that cannot cover value plus the fee.
In-contract failures produce an included receipt with status reverted: the
contract's writes and the value transfer roll back, the nonce bump and the
gas fee do not. Fees move from sender to block proposer, so total supply is
conserved by construction.
"""

from __future__ import annotations

from .contracts import BlockContext, CallEnv, ContractRevert, resolve
from .crypto import address_of
from .gas import GasMeter, GasSchedule, fee_wei
from .state import CONTRACT_ADDRESSES, LedgerState
from .transactions import Contract, Receipt, Transaction


class TxExcluded(Exception):
    """Transaction cannot enter a block; state untouched."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class ViewError(Exception):
    """A view call failed (unknown function or in-contract error)."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class Executor:
    def __init__(self, schedule: GasSchedule):
        self.schedule = schedule

    def check_admissible(self, state: LedgerState, tx: Transaction) -> None:
        """Raise TxExcluded if the transaction can never enter the next block."""
        if not tx.signature_valid():
            raise TxExcluded("BadSignature")
        acct = state.account(tx.sender)
        if acct is None:
            raise TxExcluded("UnknownSender")
        if tx.nonce != acct.nonce:
            raise TxExcluded("BadNonce")
        if tx.value > acct.balance:
            raise TxExcluded("InsufficientFunds")

    def execute_transaction(
        self, state: LedgerState, tx: Transaction, ctx: BlockContext
    ) -> tuple[LedgerState, Receipt]:
        """Apply one transaction, returning new state and its receipt.

        The input state is never mutated. Raises TxExcluded when the
        transaction must not be included at all.
        """
        self.check_admissible(state, tx)
        base_gas = self.schedule.tx_base + self.schedule.calldata_per_byte * len(tx.args)
        meter = GasMeter(self.schedule)
        work = state.copy()

        # Envelope value moves into the contract pool before dispatch.
        work.accounts[tx.sender].balance -= tx.value
        pool = work.accounts[CONTRACT_ADDRESSES[tx.contract]]
        pool.balance += tx.value

        env = CallEnv(
            work, tx.contract, ctx, caller=tx.sender, value=tx.value, meter=meter, args=tx.args
        )
        status, reason, return_value = "success", "", b""
        spec = resolve(tx.contract, tx.function)
        try:
            if spec is None:
                raise ContractRevert("UnknownFunction")
            if spec.view:
                raise ContractRevert("ViewFunction")
            return_value = spec.handler(env)
            logs = tuple(env.logs)
        except ContractRevert as exc:
            status, reason = "reverted", exc.reason
            work = state.copy()  # roll back writes and the value transfer
            logs = ()
        except Exception as exc:  # malformed args and the like revert too
            status, reason = "reverted", f"ExecutionError:{type(exc).__name__}"
            work = state.copy()
            logs = ()

        gas_used = base_gas + meter.used
        fee = fee_wei(gas_used, tx.gas_price_gwei)
        sender = work.accounts[tx.sender]
        if sender.balance < fee:
            raise TxExcluded("InsufficientFunds")
        sender.balance -= fee
        proposer_addr = address_of(ctx.proposer)
        proposer = work.accounts.get(proposer_addr)
        if proposer is None:
            raise TxExcluded("UnknownProposer")
        proposer.balance += fee
        sender.nonce += 1

        receipt = Receipt(
            tx_hash=tx.tx_hash,
            status=status,
            revert_reason=reason,
            gas_used=gas_used,
            return_value=return_value,
            logs=logs,
            gas_breakdown={
                "base": self.schedule.tx_base,
                "calldata": base_gas - self.schedule.tx_base,
                "execution": meter.used,
                "ops": dict(meter.counts),
            },
        )
        return work, receipt

    def execute_block_txs(
        self, state: LedgerState, txs: list[Transaction], ctx: BlockContext
    ) -> tuple[LedgerState, list[Receipt]]:
        """Apply a block's transactions in order; any exclusion-class failure
        means the block itself is invalid."""
        receipts = []
        for index, tx in enumerate(txs):
            block_ctx = BlockContext(
                timestamp=ctx.timestamp, proposer=ctx.proposer, height=ctx.height, tx_index=index
            )
            state, receipt = self.execute_transaction(state, tx, block_ctx)
            receipts.append(receipt)
        return state, receipts

    def call_view(
        self, state: LedgerState, contract: Contract, function: str, args: bytes
    ) -> bytes:
        """Run a declared view against a state snapshot. No gas, no writes."""
        spec = resolve(contract, function)
        if spec is None:
            raise ViewError("UnknownFunction")
        if not spec.view:
            raise ViewError("NotAView")
        snapshot = state.copy()
        env = CallEnv(
            snapshot,
            contract,
            BlockContext(timestamp=0, proposer=bytes(32)),
            caller=bytes(20),
            meter=None,
            args=args,
        )
        try:
            return spec.handler(env)
        except ContractRevert as exc:
            raise ViewError(exc.reason) from exc
