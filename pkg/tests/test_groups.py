"""Finite group tables: construction, validation, functions on groups."""

import json

import numpy as np
import pytest

from herzlab.groups import (
    BUILTIN_GROUP_NAMES,
    FiniteGroup,
    GroupFunction,
    GroupTableError,
    cyclic_group,
    dihedral_group,
    direct_product,
    group_from_name,
    group_from_table,
    load_group,
    quaternion_group,
    symmetric_group,
)


class TestBuiltins:
    @pytest.mark.parametrize("name", sorted(BUILTIN_GROUP_NAMES))
    def test_all_builtins_validate(self, name):
        g = group_from_name(name)
        assert g.order >= 1
        assert g.mul(g.identity, 0) == 0
        for a in range(g.order):
            assert g.mul(a, g.inv(a)) == g.identity
            assert g.mul(g.inv(a), a) == g.identity

    def test_cyclic_orders(self):
        for n in range(1, 9):
            g = cyclic_group(n)
            assert g.order == n
            assert g.is_abelian

    def test_symmetric_three_not_abelian(self):
        g = symmetric_group(3)
        assert g.order == 6
        assert not g.is_abelian
        a, b = g.noncommuting_pair()
        assert g.mul(a, b) != g.mul(b, a)

    def test_dihedral_and_quaternion_orders(self):
        assert dihedral_group(4).order == 8
        assert quaternion_group().order == 8
        assert not dihedral_group(4).is_abelian
        assert not quaternion_group().is_abelian

    def test_quaternion_has_unique_involution(self):
        g = quaternion_group()
        involutions = [
            a for a in range(1, g.order) if g.mul(a, a) == g.identity
        ]
        # -1 is the only element of order two, unlike the dihedral group
        assert len(involutions) == 1

    def test_every_element_order_divides_group_order(self):
        for name in sorted(BUILTIN_GROUP_NAMES):
            g = group_from_name(name)
            for a in range(g.order):
                x, k = a, 1
                while x != g.identity:
                    x = g.mul(x, a)
                    k += 1
                assert g.order % k == 0


class TestValidation:
    def test_row_not_permutation(self):
        table = np.array([[0, 1], [0, 0]])
        with pytest.raises(GroupTableError, match="row 1"):
            FiniteGroup(table)

    def test_column_not_permutation(self):
        # every row is a permutation but column 1 repeats the value 1
        bad = np.array([[0, 1, 2], [1, 0, 2], [2, 1, 0]])
        with pytest.raises(GroupTableError, match="column"):
            FiniteGroup(bad)

    def test_associativity_failure(self):
        # smallest non-associative loop: order 5, two-sided identity,
        # Latin in both directions, yet (1*1)*2 != 1*(1*2)
        table = np.array(
            [
                [0, 1, 2, 3, 4],
                [1, 0, 3, 4, 2],
                [2, 3, 4, 0, 1],
                [3, 4, 1, 2, 0],
                [4, 2, 0, 1, 3],
            ]
        )
        with pytest.raises(GroupTableError, match="associativity"):
            FiniteGroup(table)

    def test_identity_cross_check(self):
        table = np.array([[0, 1], [1, 0]])
        with pytest.raises(GroupTableError, match="identity"):
            group_from_table(table.ravel(), order=2, identity=1)

    def test_from_flat_table(self):
        g = group_from_table([0, 1, 1, 0], order=2)
        assert g.order == 2
        assert g.identity == 0


class TestProducts:
    def test_product_order_and_commutativity(self):
        g = direct_product(cyclic_group(2), symmetric_group(3))
        assert g.order == 12
        assert not g.is_abelian
        h = direct_product(cyclic_group(2), cyclic_group(3))
        assert h.order == 6
        assert h.is_abelian

    def test_product_of_cyclics_matches_cyclic_when_coprime(self):
        # Z_2 x Z_3 is isomorphic to Z_6; orders of elements must agree as multisets
        h = direct_product(cyclic_group(2), cyclic_group(3))
        z6 = cyclic_group(6)

        def element_orders(g):
            orders = []
            for a in range(g.order):
                x, k = a, 1
                while x != g.identity:
                    x = g.mul(x, a)
                    k += 1
                orders.append(k)
            return sorted(orders)

        assert element_orders(h) == element_orders(z6)

    def test_name_parser(self):
        g = group_from_name("Z_2xZ_4")
        assert g.order == 8
        with pytest.raises(GroupTableError, match="unknown group"):
            group_from_name("E_8")


class TestLoadGroup:
    def test_load_builtin_by_name(self):
        assert load_group("S_3").order == 6

    def test_load_json_file(self, tmp_path):
        g = cyclic_group(3)
        path = tmp_path / "z3.json"
        path.write_text(
            json.dumps(
                {
                    "order": 3,
                    "identity": 0,
                    "table": g.cayley.ravel().tolist(),
                    "name": "Z3-from-disk",
                }
            )
        )
        loaded = load_group(str(path))
        assert loaded.order == 3
        assert np.array_equal(loaded.cayley, g.cayley)

    def test_load_json_missing_field(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text(json.dumps({"order": 2, "identity": 0}))
        with pytest.raises(GroupTableError, match="table"):
            load_group(str(path))

    def test_load_json_broken_table_names_row(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(
            json.dumps({"order": 2, "identity": 0, "table": [0, 1, 1, 1]})
        )
        with pytest.raises(GroupTableError, match="row 1"):
            load_group(str(path))


class TestGroupFunction:
    def test_delta_and_one(self):
        g = cyclic_group(4)
        d = GroupFunction.delta(g, 2)
        assert d(2) == 1.0 and d(0) == 0.0
        assert np.all(GroupFunction.one(g).values == 1.0)

    def test_character_is_multiplicative(self):
        g = cyclic_group(5)
        chi = GroupFunction.character(g, 2)
        for a in range(5):
            for b in range(5):
                assert chi(g.mul(a, b)) == pytest.approx(chi(a) * chi(b))

    def test_character_rejects_noncyclic_table(self):
        with pytest.raises(ValueError, match="cyclic"):
            GroupFunction.character(symmetric_group(3), 1)

    def test_outer_product_function(self):
        g, h = cyclic_group(2), cyclic_group(3)
        u = GroupFunction(g, np.array([1.0, 2.0]))
        v = GroupFunction(h, np.array([1.0, 3.0, 5.0]))
        w = GroupFunction.outer(u, v)
        assert w.group.order == 6
        # element (a, b) is encoded as a * |H| + b
        assert w(1 * 3 + 2) == pytest.approx(2.0 * 5.0)

    def test_pointwise_product(self):
        g = cyclic_group(3)
        u = GroupFunction(g, np.array([1.0, 2.0, 3.0]))
        v = GroupFunction(g, np.array([2.0, 0.5, 1.0]))
        assert np.allclose(u.pointwise(v).values, [2.0, 1.0, 3.0])

    def test_length_mismatch(self):
        g = cyclic_group(3)
        with pytest.raises(ValueError, match="values"):
            GroupFunction(g, np.array([1.0, 2.0]))
