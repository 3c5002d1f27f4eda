"""Synthetic candidate corpus: paired vulnerable/correct variants per rule.

Used by the acceptance suite to show static confirmation separates the
seeded-vulnerable half from the seeded-correct half with zero crossover,
and as parse volume for the throughput budget.
"""

from __future__ import annotations

import os
from dataclasses import dataclass


@dataclass
class CorpusCase:
    filename: str
    source: str
    rule_id: str
    fid: str
    vulnerable: bool
    recognition: dict  # slot -> (name, description)


def _deposit(i: int, vulnerable: bool) -> CorpusCase:
    name = f"Deposit{'Vul' if vulnerable else 'Ok'}{i}"
    if vulnerable:
        body = f"""        require(amount > {i}, "amount");
        uint256 pool = reserves;
        uint256 shares = 0;
        if (totalSupply == 0) {{
            shares = amount;
        }} else {{
            shares = amount * totalSupply / pool;
        }}
        shareOf[msg.sender] = shares;"""
    else:
        body = f"""        require(amount > {i}, "amount");
        uint256 supplyCache = totalSupply;
        uint256 shares = amount * conversion;
        shareOf[msg.sender] = shares;"""
    source = f"""pragma solidity ^0.8.0;

contract {name} {{
    uint256 public totalSupply;
    uint256 internal reserves;
    uint256 internal conversion = 2;
    mapping(address => uint256) internal shareOf;

    function deposit(uint256 amount) public {{
{body}
    }}
}}
"""
    return CorpusCase(
        filename=f"{name}.sol",
        source=source,
        rule_id="risky-first-deposit",
        fid=f"{name}.deposit",
        vulnerable=vulnerable,
        recognition={
            "VariableA": ("shares", "total minted share"),
            "VariableB": ("totalSupply", "total supply checked for zero"),
            "VariableC": ("amount", "deposit amount"),
        },
    )


def _checkpoint(i: int, vulnerable: bool) -> CorpusCase:
    name = f"Stake{'Vul' if vulnerable else 'Ok'}{i}"
    if vulnerable:
        body = f"""        stakes[msg.sender] -= amount;
        checkpoint(msg.sender);
        payout = amount + {i};"""
    else:
        body = f"""        checkpoint(msg.sender);
        stakes[msg.sender] -= amount;
        payout = amount + {i};"""
    source = f"""pragma solidity ^0.8.0;

contract {name} {{
    mapping(address => uint256) public stakes;
    mapping(address => uint256) internal lastTouch;
    uint256 internal payout;

    function withdraw(uint256 amount) public {{
{body}
    }}

    function checkpoint(address user) internal {{
        lastTouch[user] = block.number;
    }}
}}
"""
    return CorpusCase(
        filename=f"{name}.sol",
        source=source,
        rule_id="wrong-checkpoint-order",
        fid=f"{name}.withdraw",
        vulnerable=vulnerable,
        recognition={
            "CheckpointStatement": ("checkpoint", "invokes the user checkpoint"),
            "UpdateStatement": ("stakes[msg.sender] -= amount;", "stake update"),
        },
    )


def _interest(i: int, vulnerable: bool) -> CorpusCase:
    name = f"Lend{'Vul' if vulnerable else 'Ok'}{i}"
    if vulnerable:
        body = """        rewards[msg.sender] += pendingReward;
        accrueInterest();"""
    else:
        body = """        accrueInterest();
        rewards[msg.sender] += pendingReward;"""
    source = f"""pragma solidity ^0.8.0;

contract {name} {{
    mapping(address => uint256) public rewards;
    uint256 internal interestIndex = {i};
    uint256 internal pendingReward = {i + 3};

    function harvest() public {{
{body}
    }}

    function accrueInterest() internal {{
        interestIndex = interestIndex + 1;
    }}
}}
"""
    return CorpusCase(
        filename=f"{name}.sol",
        source=source,
        rule_id="wrong-interest-rate-order",
        fid=f"{name}.harvest",
        vulnerable=vulnerable,
        recognition={
            "UpdateStatement": ("accrueInterest", "brings the interest index up to date"),
            "DistributeStatement": ("rewards[msg.sender] += pendingReward;",
                                    "distributes the pending reward"),
        },
    )


def _slippage(i: int, vulnerable: bool) -> CorpusCase:
    name = f"Trade{'Vul' if vulnerable else 'Ok'}{i}"
    guard = "" if vulnerable else '\n        require(received >= floorAmount, "slip");'
    source = f"""pragma solidity ^0.8.0;

contract {name} {{
    mapping(address => uint256) public balances;
    IRouter internal router;
    uint256 internal floorAmount = {i + 1};

    function swapTokens(uint256 amountIn) public {{
        uint256 received = router.swapExact(amountIn, {i});{guard}
        balances[msg.sender] += received;
    }}
}}
"""
    return CorpusCase(
        filename=f"{name}.sol",
        source=source,
        rule_id="slippage",
        fid=f"{name}.swapTokens",
        vulnerable=vulnerable,
        recognition={"ReceivedAmount": ("received", "amount received from the swap")},
    )


def _amm_price(i: int, vulnerable: bool) -> CorpusCase:
    name = f"Price{'Vul' if vulnerable else 'Ok'}{i}"
    if vulnerable:
        body = f"""        uint256 price = reserve0 * 1e18 / (reserve0 + {i + 1});
        lastPrice = price;
        return price;"""
    else:
        body = """        uint256 price = fixedPrice;
        snapshot = reserve0;
        lastPrice = price;
        return price;"""
    source = f"""pragma solidity ^0.8.0;

contract {name} {{
    uint256 public reserve0 = {i + 10};
    uint256 public fixedPrice = {i + 5};
    uint256 public lastPrice;
    uint256 internal snapshot;

    function lpPrice() public returns (uint256) {{
{body}
    }}
}}
"""
    return CorpusCase(
        filename=f"{name}.sol",
        source=source,
        rule_id="price-manipulation-by-amm",
        fid=f"{name}.lpPrice",
        vulnerable=vulnerable,
        recognition={
            "PriceValue": ("price", "calculated LP token price"),
            "SupplySource": ("reserve0", "market reserve the price reads"),
        },
    )


def _front_running(i: int, vulnerable: bool) -> CorpusCase:
    name = f"Mint{'Vul' if vulnerable else 'Ok'}{i}"
    guard = "" if vulnerable else '\n        require(account == msg.sender, "self only");'
    source = f"""pragma solidity ^0.8.0;

contract {name} {{
    mapping(address => uint256) public balances;

    function mintTokens(address recipient, uint256 amount) public {{
        issue(recipient, amount + {i});
    }}

    function issue(address account, uint256 value) internal {{{guard}
        balances[account] += value;
    }}
}}
"""
    return CorpusCase(
        filename=f"{name}.sol",
        source=source,
        rule_id="front-running",
        fid=f"{name}.mintTokens",
        vulnerable=vulnerable,
        recognition={
            "TransferCall": ("issue", "credits the recipient account"),
            "RecipientVar": ("recipient", "address receiving the minted tokens"),
        },
    )


GENERATORS = (_deposit, _checkpoint, _interest, _slippage, _amm_price, _front_running)


def build_corpus(variants: int = 3) -> list:
    cases = []
    for generator in GENERATORS:
        for i in range(variants):
            cases.append(generator(i, vulnerable=True))
            cases.append(generator(i, vulnerable=False))
    return cases


FILLER_FUNCTION = """    function shuffle{j}(uint256 seed) internal returns (uint256) {{
        uint256 acc = seed + {j};
        for (uint256 i = 0; i < 8; i++) {{
            acc = acc * 31 + i;
        }}
        if (acc > 1000) {{
            acc = acc % 997;
        }}
        return acc;
    }}
"""


def filler_source(index: int, functions: int = 20) -> str:
    body = "".join(FILLER_FUNCTION.format(j=j) for j in range(functions))
    return f"pragma solidity ^0.8.0;\n\ncontract Filler{index} {{\n{body}}}\n"


def write_corpus(root: str, cases: list, filler_files: int = 0,
                 filler_functions: int = 20) -> None:
    contracts = os.path.join(root, "contracts")
    os.makedirs(contracts, exist_ok=True)
    for case in cases:
        with open(os.path.join(contracts, case.filename), "w", encoding="utf-8") as fh:
            fh.write(case.source)
    for i in range(filler_files):
        with open(os.path.join(contracts, f"Filler{i}.sol"), "w", encoding="utf-8") as fh:
            fh.write(filler_source(i, filler_functions))
